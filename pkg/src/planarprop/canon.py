"""Canonical forms for small graphs and rooted/unrooted trees.

General graphs go through colour refinement followed by individualization
with backtracking; every leaf of the search tree is a candidate labeling and
the lexicographically smallest adjacency code wins. Automorphisms discovered
along the way prune children that lie in the same orbit of the pointwise
stabilizer of the current prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Byte code identifying an unlabeled graph; equal iff isomorphic."""

    code: bytes

    @property
    def n(self) -> int:
        return int.from_bytes(self.code[:2], "big")

    def hex(self) -> str:
        return self.code.hex()

    @classmethod
    def fromhex(cls, text: str) -> "CanonicalForm":
        return cls(bytes.fromhex(text))

    def to_graph(self, d: int | None = None) -> Graph:
        n = self.n
        bits = int.from_bytes(self.code[2:], "big") if len(self.code) > 2 else 0
        total = n * (n - 1) // 2
        edges, pos = [], 0
        for i in range(n):
            for j in range(i + 1, n):
                if bits >> (total - 1 - pos) & 1:
                    edges.append((i, j))
                pos += 1
        return Graph.from_edges(n, edges, d=d)

    def __repr__(self) -> str:
        h = self.hex()
        return f"CanonicalForm(n={self.n}, {h[:16]}{'...' if len(h) > 16 else ''})"


EMPTY_FORM = CanonicalForm((0).to_bytes(2, "big"))


def _refine(adj: list[list[int]], colors: list[int]) -> list[int]:
    """Equitable refinement; colours are ranks, so the result is canonical."""
    ncol = len(set(colors))
    n = len(adj)
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(n)]
        ranks = {s: r for r, s in enumerate(sorted(set(sigs)))}
        colors = [ranks[s] for s in sigs]
        if len(ranks) == ncol:
            return colors
        ncol = len(ranks)


def _code(adj: list[list[int]], lab: list[int]) -> tuple[int, ...]:
    n = len(adj)
    rows = [0] * n
    for v in range(n):
        r = 0
        for u in adj[v]:
            r |= 1 << (n - 1 - lab[u])
        rows[lab[v]] = r
    return tuple(rows)


def _orbit_rep(autos: list[list[int]], fixed: list[int], n: int):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for gamma in autos:
        if all(gamma[p] == p for p in fixed):
            for v in range(n):
                a, b = find(v), find(gamma[v])
                if a != b:
                    parent[max(a, b)] = min(a, b)
    return find


def canonical_labeling(adj: list[list[int]]) -> tuple[list[int], tuple[int, ...]]:
    """Return (labeling vertex -> canonical index, adjacency row code)."""
    n = len(adj)
    best: dict = {"code": None, "lab": None}
    autos: list[list[int]] = []

    def search(colors: list[int], prefix: list[int]) -> None:
        colors = _refine(adj, colors)
        if len(set(colors)) == n:
            code = _code(adj, colors)
            if best["code"] is None or code < best["code"]:
                best["code"], best["lab"] = code, colors
            elif code == best["code"]:
                inv = [0] * n
                for v, c in enumerate(best["lab"]):
                    inv[c] = v
                autos.append([inv[colors[v]] for v in range(n)])
            return
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, k in counts.items() if k > 1)
        cell = [v for v in range(n) if colors[v] == target]
        done: list[int] = []
        for v in cell:
            if done:
                find = _orbit_rep(autos, prefix, n)
                if any(find(v) == find(w) for w in done):
                    continue
            child = [2 * c + (0 if u == v else 1) for u, c in enumerate(colors)]
            search(child, prefix + [v])
            done.append(v)

    degree_colors = [len(a) for a in adj]
    search(degree_colors, [])
    return best["lab"], best["code"]


def _pack(n: int, rows: tuple[int, ...]) -> bytes:
    bits, nbits = 0, 0
    for i in range(n):
        for j in range(i + 1, n):
            bits = (bits << 1) | (rows[i] >> (n - 1 - j) & 1)
            nbits += 1
    body = bits.to_bytes((nbits + 7) // 8, "big") if nbits else b""
    return n.to_bytes(2, "big") + body


def canonical_form(g: Graph) -> CanonicalForm:
    """Isomorphism-invariant code of ``g`` (deterministic).

    Intended for single components; sizes up to a few dozen vertices are
    practical for the sparse, low-symmetry graphs used here.
    """
    if g.n == 0:
        return EMPTY_FORM
    adj = g.adjacency()
    _, rows = canonical_labeling(adj)
    return CanonicalForm(_pack(g.n, rows))


def canonical_form_adj(adj: list[list[int]]) -> CanonicalForm:
    if not adj:
        return EMPTY_FORM
    _, rows = canonical_labeling(adj)
    return CanonicalForm(_pack(len(adj), rows))


# -- trees -----------------------------------------------------------------

def rooted_tree_code(adj: list[list[int]], root: int) -> str:
    """AHU parenthesis encoding of the tree hanging from ``root``."""
    parent = {root: -1}
    order = [root]
    for v in order:
        for u in adj[v]:
            if u not in parent:
                parent[u] = v
                order.append(u)
    if len(order) != len(adj):
        raise ValueError("not a tree (disconnected)")
    enc: dict[int, str] = {}
    for v in reversed(order):
        kids = sorted(enc[u] for u in adj[v] if parent.get(u) == v)
        enc[v] = "(" + "".join(kids) + ")"
    return enc[root]


def tree_centers(adj: list[list[int]]) -> list[int]:
    n = len(adj)
    if n <= 2:
        return list(range(n))
    deg = [len(a) for a in adj]
    leaves = [v for v in range(n) if deg[v] <= 1]
    remaining = n
    while remaining > 2:
        remaining -= len(leaves)
        nxt = []
        for v in leaves:
            for u in adj[v]:
                deg[u] -= 1
                if deg[u] == 1:
                    nxt.append(u)
        leaves = nxt
    return sorted(leaves)


def unrooted_tree_code(adj: list[list[int]]) -> str:
    """Canonical encoding of a free tree: smallest rooted code over its centers."""
    if not adj:
        return ""
    return min(rooted_tree_code(adj, c) for c in tree_centers(adj))


def tree_from_code(code: str) -> list[list[int]]:
    """Adjacency lists of the rooted tree encoded by ``code`` (root is vertex 0)."""
    adj: list[list[int]] = []
    stack: list[int] = []
    for ch in code:
        if ch == "(":
            v = len(adj)
            adj.append([])
            if stack:
                adj[stack[-1]].append(v)
                adj[v].append(stack[-1])
            stack.append(v)
        elif ch == ")":
            stack.pop()
        else:
            raise ValueError(f"bad character {ch!r} in tree code")
    return adj
