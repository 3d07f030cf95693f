"""Bounded-degree graphs and the metered neighbor-query oracle."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._validation import UsageError, check_positive_int, check_rng, check_vertex


class Graph:
    """Immutable labeled graph with a degree bound, stored as CSR adjacency.

    Slot ``i`` of vertex ``v`` is ``indices[indptr[v] + i]``; slots past the
    degree of ``v`` are empty and answer ``None`` to neighbor queries.
    """

    __slots__ = ("n", "d", "indptr", "indices", "_degrees")

    def __init__(self, n: int, d: int, indptr, indices, *, validate: bool = True):
        self.n = int(n)
        self.d = int(d)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        self._degrees = None
        if validate:
            self._validate()

    def _validate(self) -> None:
        if self.n < 0 or self.d < 1:
            raise UsageError(f"need n >= 0 and d >= 1, got n={self.n}, d={self.d}")
        if self.indptr.shape != (self.n + 1,) or self.indptr[0] != 0:
            raise UsageError("malformed indptr")
        if np.any(np.diff(self.indptr) < 0) or self.indptr[-1] != len(self.indices):
            raise UsageError("malformed indptr")
        deg = self.degrees
        if self.n and deg.max() > self.d:
            raise UsageError(f"vertex degree {int(deg.max())} exceeds bound d={self.d}")
        if len(self.indices) == 0:
            return
        if self.indices.min() < 0 or self.indices.max() >= self.n:
            raise UsageError("neighbor id out of range")
        rows = np.repeat(np.arange(self.n), deg)
        if np.any(rows == self.indices):
            raise UsageError("self-loop")
        fwd = rows * self.n + self.indices
        if len(np.unique(fwd)) != len(fwd):
            raise UsageError("parallel edge")
        back = self.indices * self.n + rows
        if not np.array_equal(np.sort(fwd), np.sort(back)):
            raise UsageError("adjacency is not symmetric")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges, d: int | None = None) -> "Graph":
        """Build a graph whose slots list neighbors in ascending id order."""
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise UsageError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise UsageError("self-loop")
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        if d is None:
            d = max(1, int(np.diff(indptr).max(initial=0)))
        return cls(n, d, indptr, dst)

    @classmethod
    def from_adjacency(cls, adj: Sequence[Sequence[int]], d: int | None = None) -> "Graph":
        """Build a graph keeping the given slot order of every adjacency list."""
        n = len(adj)
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in adj])
        indices = np.fromiter((u for a in adj for u in a), dtype=np.int64,
                              count=int(indptr[-1]))
        if d is None:
            d = max(1, max((len(a) for a in adj), default=0))
        return cls(n, d, indptr, indices)

    @classmethod
    def empty(cls, n: int = 0, d: int = 1) -> "Graph":
        return cls(n, d, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    # -- accessors ----------------------------------------------------------

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._degrees = np.diff(self.indptr)
        return self._degrees

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def edges(self) -> np.ndarray:
        """Edge list with u < v, sorted."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        mask = rows < self.indices
        e = np.stack([rows[mask], self.indices[mask]], axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))] if len(e) else e.reshape(0, 2)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges()}

    def with_degree_bound(self, d: int) -> "Graph":
        return Graph(self.n, d, self.indptr, self.indices)

    def to_csr(self) -> csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int8)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def component_labels(self) -> tuple[int, np.ndarray]:
        if self.n == 0:
            return 0, np.zeros(0, dtype=np.int64)
        k, labels = connected_components(self.to_csr(), directed=False)
        return k, labels.astype(np.int64)

    def components(self) -> list[np.ndarray]:
        """Vertex arrays of the connected components, ordered by smallest vertex."""
        k, labels = self.component_labels()
        if k == 0:
            return []
        order = np.argsort(labels, kind="stable")
        cuts = np.cumsum(np.bincount(labels, minlength=k))[:-1]
        comps = np.split(order, cuts)
        return sorted(comps, key=lambda c: int(c[0]))

    def induced_subgraph(self, vertices) -> "Graph":
        """Subgraph on ``vertices``, relabeled 0..len-1 in ascending id order."""
        vs = np.unique(np.asarray(vertices, dtype=np.int64))
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[vs] = np.arange(len(vs))
        e = self.edges()
        keep = (pos[e[:, 0]] >= 0) & (pos[e[:, 1]] >= 0) if len(e) else np.zeros(0, bool)
        return Graph.from_edges(len(vs), pos[e[keep]], d=self.d)

    # -- comparison / text format -------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.d == other.d
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self) -> int:
        return hash((self.n, self.d, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, d={self.d}, m={self.n_edges})"

    def to_text(self) -> str:
        lines = [f"{self.n} {self.d}"]
        for v in range(self.n):
            nb = " ".join(str(u) for u in self.neighbors(v).tolist())
            lines.append(f"{v}: {nb}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise UsageError("empty graph file")
        try:
            n, d = (int(x) for x in lines[0].split())
        except ValueError as exc:
            raise UsageError(f"bad header line {lines[0]!r}") from exc
        if len(lines) != n + 1:
            raise UsageError(f"expected {n} vertex lines, found {len(lines) - 1}")
        adj: list[list[int]] = []
        for expect, line in enumerate(lines[1:]):
            head, _, rest = line.partition(":")
            if int(head) != expect:
                raise UsageError(f"vertex lines out of order at {line!r}")
            adj.append([int(x) for x in rest.split()])
        return cls.from_adjacency(adj, d)


@dataclass
class QueryLedger:
    """Per-session query accounting; counters only ever grow."""

    neighbor_queries: int = 0
    vertices_touched: set = field(default_factory=set)

    def charge(self, queries: int, vertices: Iterable[int] = ()) -> None:
        self.neighbor_queries += int(queries)
        self.vertices_touched.update(int(v) for v in vertices)


class ComponentOverflow(Exception):
    """A component exploration saw more vertices than its cap allows."""

    def __init__(self, start: int, cap: int, seen: int):
        super().__init__(f"component of vertex {start} exceeds cap {cap} ({seen} seen)")
        self.start, self.cap, self.seen = start, cap, seen


@dataclass(frozen=True)
class ComponentView:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    queries: int

    @property
    def size(self) -> int:
        return len(self.vertices)

    def as_graph(self, d: int) -> Graph:
        pos = {v: i for i, v in enumerate(self.vertices)}
        return Graph.from_edges(len(self.vertices),
                                [(pos[u], pos[v]) for u, v in self.edges], d=d)


def neighbor_query(g: Graph, ledger: QueryLedger, v: int, i: int) -> int | None:
    """Answer "the i-th neighbor of v", or None for an empty slot."""
    check_vertex(g, v)
    if not isinstance(i, (int, np.integer)) or not 0 <= i < g.d:
        raise UsageError(f"slot {i!r} out of range for d={g.d}")
    ledger.neighbor_queries += 1
    ledger.vertices_touched.add(int(v))
    lo, hi = g.indptr[v], g.indptr[v + 1]
    return int(g.indices[lo + i]) if lo + i < hi else None


def explore_component(g: Graph, ledger: QueryLedger, v: int, cap: int) -> ComponentView:
    """BFS from ``v`` through neighbor queries, querying all d slots per vertex.

    Raises ComponentOverflow as soon as more than ``cap`` vertices are seen.
    """
    check_vertex(g, v)
    check_positive_int(cap, "cap")
    start = ledger.neighbor_queries
    seen = {int(v)}
    queue = deque([int(v)])
    edges = set()
    while queue:
        u = queue.popleft()
        for i in range(g.d):
            w = neighbor_query(g, ledger, u, i)
            if w is None:
                continue
            edges.add((u, w) if u < w else (w, u))
            if w not in seen:
                seen.add(w)
                if len(seen) > cap:
                    raise ComponentOverflow(int(v), cap, len(seen))
                queue.append(w)
    return ComponentView(tuple(sorted(seen)), tuple(sorted(edges)),
                         ledger.neighbor_queries - start)


def disjoint_union(parts: Sequence[tuple[Graph, int]]) -> Graph:
    """Block-structured union: each part repeated ``multiplicity`` times, in order."""
    if not parts:
        return Graph.empty()
    ds = {g.d for g, _ in parts}
    if len(ds) != 1:
        raise UsageError(f"parts disagree on the degree bound: {sorted(ds)}")
    edge_blocks, offset = [], 0
    for g, mult in parts:
        check_positive_int(mult, "multiplicity", minimum=0)
        e = g.edges()
        for _ in range(mult):
            edge_blocks.append(e + offset)
            offset += g.n
    e = np.concatenate(edge_blocks) if edge_blocks else np.zeros((0, 2), np.int64)
    return Graph.from_edges(offset, e, d=ds.pop())


def random_relabel(g: Graph, seed=None) -> Graph:
    """Apply a uniform random vertex permutation; slots re-sorted by new id."""
    rng = check_rng(seed)
    perm = rng.permutation(g.n)
    return relabel(g, perm)


def relabel(g: Graph, perm) -> Graph:
    """Vertex ``v`` of ``g`` becomes ``perm[v]``."""
    perm = np.asarray(perm, dtype=np.int64)
    e = g.edges()
    return Graph.from_edges(g.n, perm[e] if len(e) else e, d=g.d)


def pad_isolated(g: Graph, extra: int) -> Graph:
    if extra == 0:
        return g
    return Graph.from_edges(g.n + extra, g.edges(), d=g.d)
