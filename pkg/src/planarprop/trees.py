"""Trees: rooted enumeration, unrooted classes, and random bounded-degree trees.

A rooted tree here is unordered with at most two children per node, so every
vertex has degree at most 3. Rooted trees are named by their AHU parenthesis
code with children sorted; unrooted classes by the smallest code over the
tree's centers.
"""

from __future__ import annotations

from collections import defaultdict
from functools import lru_cache

import numpy as np

from ._validation import UsageError, check_positive_int, check_rng
from .canon import tree_from_code, unrooted_tree_code
from .families import SuitableFamily
from .graph import Graph

MAX_ENUMERATION_SIZE = 16
TREE_DEGREE = 3


@lru_cache(maxsize=None)
def _rooted(s: int) -> tuple[str, ...]:
    if s == 1:
        return ("()",)
    out = set(f"({c})" for c in _rooted(s - 1))
    for a in range(1, (s - 1) // 2 + 1):
        b = s - 1 - a
        for x in _rooted(a):
            for y in _rooted(b):
                if a == b and y < x:
                    continue
                out.add("(" + "".join(sorted((x, y))) + ")")
    return tuple(sorted(out))


def enumerate_rooted_trees(s: int) -> list[str]:
    """All rooted trees on s vertices with at most two children per node."""
    check_positive_int(s, "s")
    if s > MAX_ENUMERATION_SIZE:
        raise UsageError(f"enumeration is capped at s={MAX_ENUMERATION_SIZE}")
    return list(_rooted(s))


def tree_graph(code: str, d: int = TREE_DEGREE) -> Graph:
    return Graph.from_adjacency([sorted(a) for a in tree_from_code(code)], d)


def dedupe_unrooted(rooted: list[str], d: int = TREE_DEGREE) -> SuitableFamily:
    """One member per unrooted class, with the rooted orbit sizes in ``info``."""
    if not rooted:
        raise UsageError("no rooted trees given")
    sizes = {code.count("(") for code in rooted}
    if len(sizes) != 1:
        raise UsageError("rooted trees must all have the same size")
    s = sizes.pop()
    orbits: dict[str, list[str]] = defaultdict(list)
    for code in rooted:
        orbits[unrooted_tree_code(tree_from_code(code))].append(code)
    keys = sorted(orbits)
    members = [tree_graph(k, d) for k in keys]
    info = {
        "kind": "tree", "s": s, "rooted_count": len(rooted),
        "orbit_sizes": [len(orbits[k]) for k in keys], "max_orbit": max(len(v) for v in orbits.values()),
        "unrooted_codes": keys,
    }
    # distinct classes with equal edge counts differ by an even, nonzero number of edits
    min_edits = 2 if len(members) > 1 else None
    return SuitableFamily(members, s, 1.0 / s, min_pairwise_edits=min_edits, info=info)


def tree_family(s: int, d: int = TREE_DEGREE) -> SuitableFamily:
    return dedupe_unrooted(enumerate_rooted_trees(s), d)


def random_bounded_tree(n: int, d: int = TREE_DEGREE, seed=None) -> Graph:
    """Random recursive tree: vertex v attaches to a uniform earlier vertex of degree < d."""
    check_positive_int(n, "n")
    check_positive_int(d, "d", minimum=2)
    rng = check_rng(seed)
    deg = np.zeros(n, dtype=np.int64)
    open_slots = [0]  # vertices with spare degree, kept as a swap-remove list
    where = {0: 0}
    edges = np.empty((n - 1, 2), dtype=np.int64)
    for v in range(1, n):
        idx = int(rng.integers(len(open_slots)))
        u = open_slots[idx]
        edges[v - 1] = (u, v)
        deg[u] += 1
        deg[v] = 1
        if deg[u] == d:
            last = open_slots.pop()
            if last != u:
                open_slots[idx] = last
                where[last] = idx
            del where[u]
        if deg[v] < d:
            where[v] = len(open_slots)
            open_slots.append(v)
    return Graph.from_edges(n, edges, d=d)
