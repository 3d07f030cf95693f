"""Vertex partitions into small connected blocks.

Covers balanced separators (exact by subset search on small graphs, centroid
based on forests), the recursive separator decomposition for bounded
treewidth, the exact oracle for graphs that are already unions of small
components, and the sampled cut-edge estimate the tester runs first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import ceil

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import (ContractViolation, UsageError, check_fraction, check_graph,
                          check_positive_int, check_rng)
from .graph import (ComponentOverflow, ComponentView, Graph, QueryLedger,
                    explore_component, neighbor_query)


# -- partitions ----------------------------------------------------------------

@dataclass
class Partition:
    block_of: np.ndarray
    blocks: list[np.ndarray]
    cut_edges: int
    k: int
    stats: dict = field(default_factory=dict)

    @classmethod
    def from_labels(cls, g: Graph, labels, k: int, stats: dict | None = None) -> "Partition":
        """Renumber labels by smallest member vertex and count crossing edges."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (g.n,):
            raise UsageError("need one label per vertex")
        _, first = np.unique(labels, return_index=True)
        order = np.argsort(first)
        remap = np.empty(len(first), dtype=np.int64)
        remap[order] = np.arange(len(first))
        _, inv = np.unique(labels, return_inverse=True)
        block_of = remap[inv]
        blocks = _group(block_of, len(first))
        e = g.edges()
        cut = int(np.count_nonzero(block_of[e[:, 0]] != block_of[e[:, 1]])) if len(e) else 0
        return cls(block_of, blocks, cut, int(k), stats or {})

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def max_block(self) -> int:
        return max((len(b) for b in self.blocks), default=0)

    def problems(self, g: Graph) -> list[str]:
        """Independent recount of every partition invariant; empty when valid."""
        out = []
        if len(self.block_of) != g.n:
            return ["block_of has the wrong length"]
        seen = np.zeros(g.n, dtype=np.int64)
        for bid, b in enumerate(self.blocks):
            seen[b] += 1
            if np.any(self.block_of[b] != bid):
                out.append(f"block {bid} disagrees with block_of")
            if len(b) > self.k:
                out.append(f"block {bid} has {len(b)} > k={self.k} vertices")
            if len(b) and g.induced_subgraph(b).component_labels()[0] != 1:
                out.append(f"block {bid} is not connected")
        if np.any(seen != 1):
            out.append("blocks do not partition the vertex set")
        cut = sum(1 for u, v in g.edges().tolist() if self.block_of[u] != self.block_of[v])
        if cut != self.cut_edges:
            out.append(f"cut_edges={self.cut_edges} but recount gives {cut}")
        return out

    def to_text(self) -> str:
        lines = [f"{i}: " + " ".join(map(str, b.tolist())) for i, b in enumerate(self.blocks)]
        lines.append(f"# cut_edges={self.cut_edges} k={self.k}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, g: Graph) -> "Partition":
        labels = np.full(g.n, -1, dtype=np.int64)
        k = None
        for line in text.splitlines():
            if line.startswith("#"):
                fields = dict(x.split("=") for x in line[1:].split())
                k = int(fields["k"])
            elif line.strip():
                head, _, rest = line.partition(":")
                labels[[int(x) for x in rest.split()]] = int(head)
        if k is None or np.any(labels < 0):
            raise UsageError("partition text is incomplete")
        return cls.from_labels(g, labels, k)


def _group(labels: np.ndarray, k: int) -> list[np.ndarray]:
    order = np.argsort(labels, kind="stable")
    cuts = np.cumsum(np.bincount(labels, minlength=k))[:-1]
    return list(np.split(order, cuts))


def component_partition(g: Graph, k: int | None = None) -> Partition:
    _, labels = g.component_labels()
    p = Partition.from_labels(g, labels, 1)
    p.k = max(p.max_block(), 1) if k is None else int(k)
    return p


# -- partition oracles ---------------------------------------------------------

class TrivialPartitionOracle:
    """Exact partition oracle for graphs whose components have at most k vertices.

    The block of v is its component, found by capped BFS through neighbor
    queries. Blocks are memoized, but every call is charged the d * |block|
    queries a fresh exploration would cost, so ledgers stay exact.
    """

    def __init__(self, g: Graph, k: int):
        self.g = check_graph(g)
        self.k = check_positive_int(k, "k")
        self._block: dict[int, ComponentView] = {}

    def __call__(self, ledger: QueryLedger, v: int) -> ComponentView:
        view = self._block.get(int(v))
        if view is None:
            view = explore_component(self.g, ledger, int(v), self.k)
            for u in view.vertices:
                self._block[u] = view
        else:
            ledger.charge(view.queries, view.vertices)
        return view


class FixedPartitionOracle:
    """Answers blocks of a precomputed partition, charging d * |block| per call."""

    def __init__(self, g: Graph, partition: Partition):
        self.g = check_graph(g)
        self.partition = partition
        self.k = partition.k
        self._views: dict[int, ComponentView] = {}

    def __call__(self, ledger: QueryLedger, v: int) -> ComponentView:
        bid = int(self.partition.block_of[v])
        view = self._views.get(bid)
        if view is None:
            vs = self.partition.blocks[bid]
            sub = self.g.induced_subgraph(vs)
            edges = tuple(sorted((int(vs[a]), int(vs[b])) for a, b in sub.edges().tolist()))
            view = ComponentView(tuple(int(x) for x in vs), edges, self.g.d * len(vs))
            self._views[bid] = view
        ledger.charge(view.queries, view.vertices)
        return view


def trivial_partition_oracle(g: Graph, ledger: QueryLedger, v: int, k: int) -> ComponentView:
    return explore_component(g, ledger, v, k)


# -- cut-edge estimate ---------------------------------------------------------

@dataclass(frozen=True)
class CutEstimate:
    fraction: float
    accept: bool
    samples: int
    cut_samples: int


def phase_one_samples(eps: float) -> int:
    return ceil(48 / eps)


def cut_edge_estimate(g: Graph, oracle, eps: float, *, trials: int | None = None,
                      seed=None, ledger: QueryLedger | None = None) -> CutEstimate:
    """Fraction of sampled (vertex, slot) pairs whose edge leaves the vertex's block.

    Vertex and slot are uniform; empty slots count as uncut, matching the
    d*n normalization of distance. Accepts when the estimate is <= eps/4.
    Oracle overflow propagates to the caller.
    """
    eps = check_fraction(eps, "eps")
    trials = phase_one_samples(eps) if trials is None else check_positive_int(trials, "trials")
    rng = check_rng(seed)
    ledger = QueryLedger() if ledger is None else ledger
    vs = rng.integers(0, g.n, size=trials)
    slots = rng.integers(0, g.d, size=trials)
    cut = 0
    for v, i in zip(vs.tolist(), slots.tolist()):
        u = neighbor_query(g, ledger, v, i)
        if u is None:
            continue
        if oracle(ledger, v).vertices[0] != oracle(ledger, u).vertices[0]:
            cut += 1
    frac = cut / trials
    return CutEstimate(frac, frac <= eps / 4, trials, cut)


# -- balanced separators -------------------------------------------------------

@dataclass(frozen=True)
class SeparatorResult:
    vertices: tuple[int, ...]
    balance: float  # largest remaining component over n
    exact: bool
    checked: int = 0

    @property
    def size(self) -> int:
        return len(self.vertices)


def _masks(g: Graph) -> list[int]:
    return [sum(1 << int(u) for u in g.neighbors(v)) for v in range(g.n)]


def _component_sizes(masks: list[int], alive: int) -> list[int]:
    sizes = []
    while alive:
        low = alive & -alive
        comp = frontier = low
        while frontier:
            nxt = 0
            f = frontier
            while f:
                b = f & -f
                nxt |= masks[b.bit_length() - 1]
                f ^= b
            frontier = nxt & alive & ~comp
            comp |= frontier
        sizes.append(bin(comp).count("1"))
        alive &= ~comp
    return sizes


def split_sides(sizes: list[int], lo: float) -> list[int] | None:
    """Indices of one side of a 2-grouping with both sides >= lo, or None.

    Exact subset sum over the piece sizes (bitset of reachable sums), then the
    smallest feasible sum is traced back to a set of pieces.
    """
    total = sum(sizes)
    if not sizes:
        return None
    reach = [1]  # reach[i]: bitset of sums formed by the first i pieces
    for c in sizes:
        reach.append(reach[-1] | (reach[-1] << c))
    target = next((x for x in range(total + 1)
                   if reach[-1] >> x & 1 and x >= lo and total - x >= lo), None)
    if target is None:
        return None
    side = []
    for i in range(len(sizes) - 1, -1, -1):
        if not reach[i] >> target & 1:
            side.append(i)
            target -= sizes[i]
    return sorted(side)


def is_balanced(sizes: list[int], n: int, balance: float, rule: str) -> bool:
    if not sizes:
        return True
    if rule == "components":
        return max(sizes) <= balance * n + 1e-9
    return split_sides(sizes, (1 - balance) * n - 1e-9) is not None


def min_balanced_separator(g: Graph, balance: float = 2 / 3, *, rule: str = "sides",
                           budget: int = 2_000_000) -> SeparatorResult:
    """Smallest S whose removal balances the rest, by subsets of increasing size.

    ``rule="sides"``: the components left over can be grouped into two sides
    with at least (1 - balance) * n vertices each. ``rule="components"``:
    every leftover component has at most balance * n vertices. Removing all
    vertices counts as valid. When more than ``budget`` subsets would be
    examined, a BFS-layer heuristic answers instead with ``exact=False``.
    """
    check_graph(g)
    if rule not in ("sides", "components"):
        raise UsageError(f"unknown balance rule {rule!r}")
    if not 0.5 <= balance < 1:
        raise UsageError(f"balance must lie in [1/2, 1), got {balance}")
    n = g.n
    masks = _masks(g)
    full = (1 << n) - 1
    checked = 0
    for size in range(n + 1):
        for S in combinations(range(n), size):
            checked += 1
            if checked > budget:
                return _layer_separator(g, masks, balance, rule, checked)
            alive = full
            for v in S:
                alive &= ~(1 << v)
            sizes = _component_sizes(masks, alive)
            if is_balanced(sizes, n, balance, rule):
                return SeparatorResult(S, max(sizes, default=0) / n if n else 0.0, True, checked)
    raise AssertionError("unreachable: removing every vertex is always balanced")


def _layer_separator(g, masks, balance, rule, checked) -> SeparatorResult:
    n = g.n
    full = (1 << n) - 1
    best: tuple[int, ...] = tuple(range(n))
    for start in range(n):
        dist = {start: 0}
        layers = [[start]]
        while layers[-1]:
            nxt = []
            for v in layers[-1]:
                for u in g.neighbors(v).tolist():
                    if u not in dist:
                        dist[u] = len(layers)
                        nxt.append(u)
            layers.append(nxt)
        for layer in layers[:-1]:
            if len(layer) >= len(best):
                continue
            alive = full
            for v in layer:
                alive &= ~(1 << v)
            if is_balanced(_component_sizes(masks, alive), n, balance, rule):
                best = tuple(sorted(layer))
    alive = full
    for v in best:
        alive &= ~(1 << v)
    sizes = _component_sizes(masks, alive)
    return SeparatorResult(best, max(sizes, default=0) / n if n else 0.0, False, checked)


def tree_separator(g: Graph) -> list[int]:
    """(1/3, 2/3) separator of a forest with at most one vertex.

    Empty when no component exceeds two thirds of the vertices, otherwise the
    centroid of the largest component.
    """
    k, labels = g.component_labels()
    if g.n == 0:
        return []
    sizes = np.bincount(labels, minlength=k)
    big = int(np.argmax(sizes))
    if 3 * sizes[big] <= 2 * g.n:
        return []
    return [centroid(g, np.flatnonzero(labels == big))]


def centroid(g: Graph, vertices) -> int:
    """Vertex of a tree whose removal leaves pieces of at most half the tree."""
    vertices = [int(v) for v in vertices]
    root = vertices[0]
    parent = {root: -1}
    order = [root]
    for v in order:
        for u in g.neighbors(v).tolist():
            if u not in parent:
                parent[u] = v
                order.append(u)
    size = {v: 1 for v in order}
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    total = len(order)
    best, best_piece = root, total
    for v in order:
        piece = total - size[v]
        for u in g.neighbors(v).tolist():
            if parent.get(u) == v:
                piece = max(piece, size[u])
        if piece < best_piece:
            best, best_piece = v, piece
    return best


def default_separator(g: Graph) -> list[int]:
    """Centroid rule on forests, exact subset search on anything else."""
    k, _ = g.component_labels()
    if g.n_edges == g.n - k:
        return tree_separator(g)
    return list(min_balanced_separator(g, 2 / 3).vertices)


# -- recursive decomposition ---------------------------------------------------

def decompose(g: Graph, eps: float, tau: int, separator_fn=None) -> Partition:
    """Split by balanced separators until every piece is below 6*tau/eps vertices.

    Each oversized piece W asks ``separator_fn`` for a set S with |S| <= tau
    such that the components of W - S group into two sides of at least
    (|W| - |S|)/3 vertices each. Every separator vertex joins the smaller side
    it touches (or stays alone), and the edges between the two final sides
    are deleted. Blocks are the components that remain.
    """
    check_graph(g)
    eps = check_fraction(eps, "eps", closed_right=True)
    tau = check_positive_int(tau, "tau")
    sep = default_separator if separator_fn is None else separator_fn
    threshold = 6 * tau / eps
    removed = np.zeros(0, dtype=np.int64).reshape(0, 2)
    removed_parts = [removed]
    leaves: list[int] = []
    nodes = 0
    stack = [(g, np.arange(g.n, dtype=np.int64))]
    while stack:
        sub, ids = stack.pop()
        if sub.n < threshold:
            leaves.append(sub.n)
            continue
        nodes += 1
        S = sorted({int(x) for x in sep(sub)})
        if len(S) > tau:
            raise ContractViolation(f"separator of size {len(S)} exceeds tau={tau}")
        if any(not 0 <= x < sub.n for x in S):
            raise ContractViolation("separator names vertices outside the piece")
        side = _assign_sides(sub, S)
        e = sub.edges()
        crossing = e[side[e[:, 0]] != side[e[:, 1]]] if len(e) else e
        removed_parts.append(ids[crossing])
        for s_val in (1, 0):
            local = np.flatnonzero(side == s_val)
            stack.append((sub.induced_subgraph(local), ids[local]))
    removed = np.concatenate(removed_parts)
    keep = _edges_minus(g.edges(), removed, g.n)
    labels = Graph.from_edges(g.n, keep, d=g.d).component_labels()[1]
    stats = {"removed_edges": int(len(removed)), "leaves": len(leaves),
             "leaf_sizes": sorted(leaves), "internal_nodes": nodes, "threshold": threshold}
    part = Partition.from_labels(g, labels, max(1, ceil(threshold)), stats)
    return part


def _assign_sides(sub: Graph, S: list[int]) -> np.ndarray:
    keep = np.ones(sub.n, dtype=bool)
    keep[S] = False
    rest = np.flatnonzero(keep)
    inner = sub.induced_subgraph(rest)
    k, labels = inner.component_labels()
    sizes = np.bincount(labels, minlength=k).tolist() if k else []
    total = sub.n - len(S)
    chosen = split_sides(sizes, total / 3)
    if chosen is None:
        raise ContractViolation(
            f"separator leaves components {sorted(sizes, reverse=True)[:5]} that cannot be "
            f"grouped into two sides of >= {total / 3:.1f} vertices")
    side = np.full(sub.n, -1, dtype=np.int64)
    in_a = np.zeros(max(k, 1), dtype=bool)
    in_a[chosen] = True
    side[rest] = np.where(in_a[labels], 0, 1)
    counts = [int(np.count_nonzero(side == 0)), int(np.count_nonzero(side == 1))]
    for x in S:
        touching = {int(side[u]) for u in sub.neighbors(x).tolist() if side[u] >= 0}
        if touching:
            s_val = min(touching, key=lambda c: (counts[c], c))
        else:
            s_val = 0 if counts[0] <= counts[1] else 1
        side[x] = s_val
        counts[s_val] += 1
    return side


def _edges_minus(e: np.ndarray, removed: np.ndarray, n: int) -> np.ndarray:
    if not len(removed):
        return e
    r = np.sort(removed, axis=1)
    key_e = e[:, 0] * n + e[:, 1]
    key_r = r[:, 0] * n + r[:, 1]
    return e[~np.isin(key_e, key_r)]


def treewidth_partition(g: Graph, eps: float, tau: int, separator_fn=None) -> Partition:
    """Components first, then ``decompose`` at eps/2 on components above 30*tau/eps."""
    check_graph(g)
    eps = check_fraction(eps, "eps", closed_right=True)
    tau = check_positive_int(tau, "tau")
    k = int(30 * tau / eps)
    comps = g.components()
    labels = np.empty(g.n, dtype=np.int64)
    next_label = 0
    removed = 0
    decomposed = 0
    for comp in comps:
        if len(comp) <= k:
            labels[comp] = next_label
            next_label += 1
            continue
        decomposed += 1
        part = decompose(g.induced_subgraph(comp), eps / 2, tau, separator_fn)
        removed += part.stats["removed_edges"]
        labels[comp] = part.block_of + next_label
        next_label += part.n_blocks
    stats = {"removed_edges": removed, "decomposed_components": decomposed}
    return Partition.from_labels(g, labels, k, stats)


class SeparatorDecomposer(BaseEstimator):
    """Estimator wrapper: ``fit`` computes the partition, ``transform`` returns block ids."""

    def __init__(self, eps: float = 0.1, tau: int = 1, mode: str = "treewidth",
                 separator_fn=None):
        self.eps = eps
        self.tau = tau
        self.mode = mode
        self.separator_fn = separator_fn

    def fit(self, g: Graph, y=None):
        if self.mode == "treewidth":
            self.partition_ = treewidth_partition(g, self.eps, self.tau, self.separator_fn)
        elif self.mode == "decompose":
            self.partition_ = decompose(g, self.eps, self.tau, self.separator_fn)
        else:
            raise UsageError(f"unknown mode {self.mode!r}")
        self.n_vertices_ = g.n
        return self

    def transform(self, g: Graph) -> np.ndarray:
        if not hasattr(self, "partition_"):
            raise UsageError("call fit before transform")
        if g.n != self.n_vertices_:
            raise UsageError("graph does not match the fitted one")
        return self.partition_.block_of.copy()

    def fit_transform(self, g: Graph, y=None) -> np.ndarray:
        return self.fit(g).transform(g)
