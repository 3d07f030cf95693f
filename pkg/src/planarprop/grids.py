"""Square grids with corner gadgets and one diagonal per unit cell.

Vertex ``(i, j)`` of the s x s grid has id ``i * s + j``. Unit cell ``(i, j)``
(lower-left corner, ``0 <= i, j <= s - 2``) has index ``i * (s - 1) + j`` and
carries either the up diagonal ``(i, j)-(i+1, j+1)`` (bit 0) or the down
diagonal ``(i, j+1)-(i+1, j)`` (bit 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from ._validation import ConstructionError, UsageError, check_rng
from .graph import Graph

MIN_GADGET_SIDE = 12
DIAGONAL_DEGREE = 8
EXHAUSTIVE_LIMIT = 1 << 20


@dataclass(frozen=True)
class GridParams:
    """Side length plus whether the four corner gadgets are attached.

    Gadgets need ``s >= 12`` to sit on disjoint vertices; the gadgetless mode
    is meant for the small sides (3 to 5) used in the sampling experiments.
    """

    s: int
    gadgets: bool = True

    def __post_init__(self):
        if not isinstance(self.s, (int, np.integer)) or self.s < 2:
            raise ConstructionError(f"side length must be an integer >= 2, got {self.s!r}")
        if self.gadgets and self.s < MIN_GADGET_SIDE:
            raise ConstructionError(
                f"corner gadgets need s >= {MIN_GADGET_SIDE}, got s={self.s}; "
                "use gadgets=False for small grids")

    @property
    def n_cells(self) -> int:
        return (self.s - 1) ** 2

    @property
    def n_vertices(self) -> int:
        return self.s * self.s

    def vid(self, i: int, j: int) -> int:
        return i * self.s + j

    def default_radius(self) -> int:
        return int(np.ceil(0.16 * self.s * self.s))


@dataclass(frozen=True)
class DiagonalCode:
    bits: tuple[int, ...]

    @classmethod
    def from_array(cls, arr) -> "DiagonalCode":
        return cls(tuple(int(b) for b in np.asarray(arr).ravel()))

    @classmethod
    def from_string(cls, text: str) -> "DiagonalCode":
        if set(text) - {"0", "1"}:
            raise UsageError(f"diagonal code must be a 0/1 string, got {text!r}")
        return cls(tuple(int(c) for c in text))

    def to_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __len__(self) -> int:
        return len(self.bits)


def gadget_edges(s: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Corner gadgets reaching 2, 3, 4 and 5 hops along the two boundary lines."""
    t = s - 1
    return [
        ((0, 0), (0, 2)), ((0, 0), (2, 0)),
        ((0, t), (0, t - 3)), ((0, t), (3, t)),
        ((t, t), (t, t - 4)), ((t, t), (t - 4, t)),
        ((t, 0), (t, 5)), ((t, 0), (t - 5, 0)),
    ]


def corners(s: int) -> dict[int, tuple[int, int]]:
    """Corner coordinates keyed by gadget reach."""
    t = s - 1
    return {2: (0, 0), 3: (0, t), 4: (t, t), 5: (t, 0)}


def _grid_edges(s: int) -> np.ndarray:
    ids = np.arange(s * s).reshape(s, s)
    horiz = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vert = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    return np.concatenate([horiz, vert])


def _base_edges(p: GridParams) -> np.ndarray:
    e = _grid_edges(p.s)
    if p.gadgets:
        extra = np.array([(p.vid(*a), p.vid(*b)) for a, b in gadget_edges(p.s)],
                         dtype=np.int64)
        e = np.concatenate([e, extra])
    return e


def build_base_graph(p: GridParams) -> Graph:
    return Graph.from_edges(p.n_vertices, _base_edges(p), d=DIAGONAL_DEGREE)


@lru_cache(maxsize=None)
def diagonal_endpoints(s: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell vertex pairs of the up and down diagonals, shape (cells, 2) each."""
    i, j = np.divmod(np.arange((s - 1) ** 2), s - 1)
    up = np.stack([i * s + j, (i + 1) * s + j + 1], axis=1)
    down = np.stack([i * s + j + 1, (i + 1) * s + j], axis=1)
    up.flags.writeable = False
    down.flags.writeable = False
    return up, down


def _check_code(p: GridParams, code) -> np.ndarray:
    bits = code.to_array() if isinstance(code, DiagonalCode) else np.asarray(code, dtype=np.uint8)
    if bits.shape != (p.n_cells,):
        raise UsageError(f"code length {bits.size} does not match (s-1)^2 = {p.n_cells}")
    if np.any(bits > 1):
        raise UsageError("code entries must be 0 or 1")
    return bits


def build_diagonal_graph(p: GridParams, code) -> Graph:
    bits = _check_code(p, code)
    up, down = diagonal_endpoints(p.s)
    diag = np.where(bits[:, None] == 0, up, down)
    return Graph.from_edges(p.n_vertices, np.concatenate([_base_edges(p), diag]),
                            d=DIAGONAL_DEGREE)


def hamming(a, b) -> int:
    a = a.to_array() if isinstance(a, DiagonalCode) else np.asarray(a)
    b = b.to_array() if isinstance(b, DiagonalCode) else np.asarray(b)
    return int(np.count_nonzero(a != b))


# -- grid symmetries -----------------------------------------------------------

def _point_maps(s: int):
    t = s - 1
    return [
        lambda i, j: (i, j), lambda i, j: (j, t - i),
        lambda i, j: (t - i, t - j), lambda i, j: (t - j, i),
        lambda i, j: (i, t - j), lambda i, j: (t - i, j),
        lambda i, j: (j, i), lambda i, j: (t - j, t - i),
    ]


@lru_cache(maxsize=None)
def dihedral_code_maps(s: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """The 8 grid symmetries acting on codes.

    Each entry is ``(target, flip)``: the transformed code has
    ``new[target[c]] = old[c] ^ flip[c]``. Computed by mapping each diagonal's
    endpoints and reading off the cell and orientation of the image.
    """
    up, _ = diagonal_endpoints(s)
    out = []
    for f in _point_maps(s):
        target = np.empty(len(up), dtype=np.int64)
        flip = np.empty(len(up), dtype=np.uint8)
        for c, (a, b) in enumerate(up):
            (i1, j1), (i2, j2) = f(*divmod(int(a), s)), f(*divmod(int(b), s))
            lo_i, lo_j = min(i1, i2), min(j1, j2)
            target[c] = lo_i * (s - 1) + lo_j
            flip[c] = 0 if (i2 - i1) * (j2 - j1) > 0 else 1
        target.flags.writeable = False
        flip.flags.writeable = False
        out.append((target, flip))
    return tuple(out)


def transform_codes(codes: np.ndarray, target: np.ndarray, flip: np.ndarray) -> np.ndarray:
    out = np.empty_like(codes)
    out[:, target] = codes ^ flip
    return out


def _lex_less(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a != b
    idx = np.argmax(diff, axis=1)
    rows = np.arange(len(a))
    return diff.any(axis=1) & (a[rows, idx] < b[rows, idx])


def orbit_minimum(codes: np.ndarray, s: int) -> np.ndarray:
    """Lexicographically smallest image of every row under the grid symmetries."""
    best = codes.copy()
    for target, flip in dihedral_code_maps(s)[1:]:
        img = transform_codes(codes, target, flip)
        less = _lex_less(img, best)
        best[less] = img[less]
    return best


def orbit_hamming(a: np.ndarray, pool: np.ndarray, s: int) -> np.ndarray:
    """min over symmetries T of Hamming(T(a), row) for every row of ``pool``."""
    best = None
    for target, flip in dihedral_code_maps(s):
        img = transform_codes(a[None, :], target, flip)[0]
        h = np.count_nonzero(pool != img, axis=1)
        best = h if best is None else np.minimum(best, h)
    return best


# -- code pools and the greedy scoop -------------------------------------------

@dataclass(frozen=True)
class CodePool:
    codes: np.ndarray  # (N, L) uint8, rows lexicographically sorted and distinct
    mode: str  # "exhaustive" or "sampled"
    requested: int


def all_codes(n_cells: int) -> np.ndarray:
    if n_cells > 24:
        raise UsageError(f"refusing to enumerate 2^{n_cells} codes")
    ints = np.arange(1 << n_cells, dtype=np.int64)
    shifts = np.arange(n_cells - 1, -1, -1, dtype=np.int64)
    return ((ints[:, None] >> shifts) & 1).astype(np.uint8)


def make_pool(p: GridParams, *, budget: int = EXHAUSTIVE_LIMIT, seed=None,
              symmetry: str = "none") -> CodePool:
    """Exhaustive pool when 2^L <= budget, otherwise ``budget`` uniform samples.

    With ``symmetry="dihedral"`` every code is replaced by its orbit minimum,
    so the pool holds one representative per symmetry class.
    """
    L = p.n_cells
    if (1 << L) <= budget:
        codes, mode = all_codes(L), "exhaustive"
    else:
        rng = check_rng(seed)
        codes, mode = rng.integers(0, 2, size=(budget, L), dtype=np.uint8), "sampled"
    if symmetry == "dihedral":
        codes = orbit_minimum(codes, p.s)
    elif symmetry != "none":
        raise UsageError(f"unknown symmetry mode {symmetry!r}")
    codes = np.unique(codes, axis=0)
    return CodePool(codes, mode, int(budget))


def scoop(pool: np.ndarray, radius: int, *, s: int | None = None,
          symmetry: str = "none", max_members: int | None = None) -> np.ndarray:
    """Greedy ball carving: take the first live code, kill its radius-ball, repeat.

    Returns indices into ``pool``. Pairwise distances among the chosen codes
    exceed ``radius`` in the selected metric (plain or symmetry-reduced
    Hamming).
    """
    if len(pool) == 0:
        raise UsageError("empty code pool")
    if radius < 1:
        raise UsageError(f"radius must be >= 1, got {radius}")
    if symmetry == "dihedral" and s is None:
        raise UsageError("symmetry-reduced distances need the side length")
    alive = np.ones(len(pool), dtype=bool)
    chosen: list[int] = []
    start = 0
    while True:
        live = np.flatnonzero(alive[start:])
        if not len(live) or (max_members is not None and len(chosen) >= max_members):
            break
        k = start + int(live[0])
        chosen.append(k)
        if symmetry == "dihedral":
            dist = orbit_hamming(pool[k], pool, s)
        else:
            dist = np.count_nonzero(pool != pool[k], axis=1)
        alive &= dist > radius
        start = k + 1
    return np.array(chosen, dtype=np.int64)


def pairwise_hamming(codes: np.ndarray, *, s: int | None = None,
                     symmetry: str = "none") -> np.ndarray:
    n = len(codes)
    out = np.zeros((n, n), dtype=np.int64)
    for a in range(n):
        if symmetry == "dihedral":
            out[a] = orbit_hamming(codes[a], codes, s)
        else:
            out[a] = np.count_nonzero(codes != codes[a], axis=1)
    return out


def hamming_ball_bound(n_cells: int, radius: int) -> float:
    """2^L divided by the Hamming ball volume; a lower bound on greedy output size."""
    from math import comb

    return 2.0 ** n_cells / sum(comb(n_cells, i) for i in range(radius + 1))


# -- rigidity checks for the base graph ----------------------------------------

def _bfs_dist(g: Graph, src: int, skip_edge=None) -> np.ndarray:
    e = g.edges()
    if skip_edge is not None:
        a, b = sorted(skip_edge)
        e = e[~((e[:, 0] == a) & (e[:, 1] == b))]
    n = g.n
    dist = np.full(n, -1, dtype=np.int64)
    adj = [[] for _ in range(n)]
    for u, v in e.tolist():
        adj[u].append(v)
        adj[v].append(u)
    dist[src] = 0
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def corner_signature(g: Graph, v: int) -> tuple[int, ...]:
    """Sorted lengths of the shortest detour around each edge at ``v``."""
    return tuple(sorted(int(_bfs_dist(g, v, (v, int(u)))[u]) for u in g.neighbors(v)))


def is_three_connected(g: Graph) -> bool:
    """True iff g has >= 4 vertices, is connected and no pair of vertices cuts it."""
    n = g.n
    if n < 4:
        return False
    A = g.to_csr()
    if connected_components(A, directed=False)[0] != 1:
        return False
    for a in range(n):
        for b in range(a + 1, n):
            keep = np.ones(n, dtype=bool)
            keep[[a, b]] = False
            idx = np.flatnonzero(keep)
            sub = A[idx][:, idx]
            order = breadth_first_order(sub, 0, directed=False, return_predecessors=False)
            if len(order) != n - 2:
                return False
    return True
