"""Count vectors and the partition-based property tester.

A graph that is close to the property is partitioned into small connected
blocks; the histogram of the blocks' isomorphism types (its count vector) is
estimated by sampling vertices, and the input is accepted when the estimate
lies close to the count vector of some graph with the property.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from math import ceil, log

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import UsageError, check_fraction, check_graph, check_positive_int, check_rng
from .canon import EMPTY_FORM, CanonicalForm, canonical_form
from .graph import ComponentOverflow, Graph, QueryLedger, disjoint_union, pad_isolated
from .partition import TrivialPartitionOracle, cut_edge_estimate, phase_one_samples

K1 = canonical_form(Graph.empty(1))
N_SEEDS = 3


@dataclass(frozen=True)
class CountVector:
    counts: dict
    total_vertices: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise UsageError("counts must be nonnegative")

    def get(self, form: CanonicalForm) -> float:
        return self.counts.get(form, 0)

    @property
    def support(self) -> list[CanonicalForm]:
        return sorted(f for f, c in self.counts.items() if c)

    def mass(self) -> float:
        return float(sum(self.counts.values()))

    def vertex_mass(self) -> float:
        return float(sum(c * f.n for f, c in self.counts.items()))

    def l1(self, other: "CountVector") -> float:
        keys = set(self.counts) | set(other.counts)
        return float(sum(abs(self.get(k) - other.get(k)) for k in keys))

    def to_dict(self) -> dict:
        return {"total_vertices": self.total_vertices,
                "counts": {f.hex(): self.counts[f] for f in self.support}}

    @classmethod
    def from_dict(cls, data: dict) -> "CountVector":
        return cls({CanonicalForm.fromhex(h): c for h, c in data["counts"].items()},
                   int(data["total_vertices"]))


def exact_count_vector(g: Graph, k: int | None = None) -> CountVector:
    """Histogram of component isomorphism types; components above k are an error."""
    check_graph(g)
    counts: Counter = Counter()
    for comp in g.components():
        if k is not None and len(comp) > k:
            raise UsageError(f"component of size {len(comp)} exceeds k={k}")
        counts[canonical_form(g.induced_subgraph(comp))] += 1
    return CountVector(dict(counts), g.n)


def materialize(cv: CountVector, d: int) -> Graph:
    """A graph with count vector ``cv``: form copies in sorted order, then K1 padding."""
    parts = [(f.to_graph(d), int(c)) for f, c in sorted(cv.counts.items())
             if c and f != K1 and f != EMPTY_FORM]
    g = disjoint_union(parts) if parts else Graph.empty(0, d)
    if g.n > cv.total_vertices:
        raise UsageError("count vector needs more vertices than it declares")
    return pad_isolated(g, cv.total_vertices - g.n) if g.n < cv.total_vertices else g


# -- sampling estimate ---------------------------------------------------------

@dataclass(frozen=True)
class CountEstimate:
    vector: CountVector
    samples: int
    queries: int
    overflow: bool = False


def estimate_sample_size(delta: float, buckets: int, t_min: int = 1) -> int:
    """Samples so each of B form probabilities is within delta*t_min/B w.p. >= 1 - 1/B.

    Hoeffding plus a union bound over the B buckets; the count error of a
    form of size t is n/t times the probability error, so the assembled
    vector is within delta*n in l1.
    """
    B = max(int(buckets), 1)
    eta = delta * t_min / B
    return ceil(log(2 * B * B) / (2 * eta * eta))


def estimate_count_vector(g: Graph, oracle, k: int, delta: float, buckets: int, *,
                          seed=None, ledger: QueryLedger | None = None,
                          t_min: int = 1, samples: int | None = None,
                          chunk: int = 1 << 20) -> CountEstimate:
    """Estimate block-type counts by uniform vertex sampling through ``oracle``.

    The share of samples landing in blocks of type F estimates |F| cnt(F)/n.
    Each sample costs one oracle call, charged to the ledger even when the
    block was already seen. An oversized block ends the run with
    ``overflow=True``.
    """
    check_graph(g)
    delta = check_fraction(delta, "delta")
    ledger = QueryLedger() if ledger is None else ledger
    start = ledger.neighbor_queries
    N = estimate_sample_size(delta, buckets, t_min) if samples is None else int(samples)
    rng = check_rng(seed)
    hits = np.zeros(g.n, dtype=np.int64)
    left = N
    while left:
        take = min(chunk, left)
        hits += np.bincount(rng.integers(0, g.n, size=take), minlength=g.n)
        left -= take
    forms: dict[int, CanonicalForm] = {}
    per_form: Counter = Counter()
    try:
        for v in np.flatnonzero(hits).tolist():
            view = oracle(ledger, v)
            key = view.vertices[0]
            if key not in forms:
                forms[key] = canonical_form(view.as_graph(g.d))
            per_form[forms[key]] += int(hits[v])
            if hits[v] > 1:
                ledger.charge(view.queries * (int(hits[v]) - 1))
    except ComponentOverflow:
        return CountEstimate(CountVector({}, g.n), N, ledger.neighbor_queries - start, True)
    counts = {f: c * g.n / (N * f.n) for f, c in per_form.items()}
    return CountEstimate(CountVector(counts, g.n), N, ledger.neighbor_queries - start)


# -- equalization --------------------------------------------------------------

@dataclass(frozen=True)
class EqualizationPlan:
    deletions: tuple[tuple[CanonicalForm, int, int], ...]  # (form, side 1|2, copies)
    edits: int
    bound: int


def equalize_edit_sequence(c1: CountVector, c2: CountVector, k: int, d: int) -> EqualizationPlan:
    """Delete surplus copies of every non-singleton form on whichever side has more.

    Deleting a copy removes its edges and leaves isolated vertices, so once
    all larger forms agree the singleton counts agree as well (the vertex
    totals are equal). The edit count never exceeds ||c1 - c2||_1 * k * d.
    """
    if c1.total_vertices != c2.total_vertices:
        raise UsageError("count vectors describe different vertex counts")
    for f in set(c1.counts) | set(c2.counts):
        if f.n > k:
            raise UsageError(f"form on {f.n} vertices exceeds k={k}")
    deletions, edits = [], 0
    for f in sorted(set(c1.counts) | set(c2.counts)):
        if f in (K1, EMPTY_FORM):
            continue
        diff = int(round(c1.get(f) - c2.get(f)))
        if diff:
            side = 1 if diff > 0 else 2
            deletions.append((f, side, abs(diff)))
            edits += abs(diff) * f.to_graph().n_edges
    bound = int(round(c1.l1(c2))) * k * d
    return EqualizationPlan(tuple(deletions), edits, bound)


def apply_plan(g: Graph, plan: EqualizationPlan, side: int) -> tuple[Graph, int]:
    """Delete the planned copies from ``g``; returns the new graph and edges removed."""
    todo = Counter({f: c for f, s, c in plan.deletions if s == side})
    drop = []
    for comp in g.components():
        if not todo:
            break
        sub = g.induced_subgraph(comp)
        f = canonical_form(sub)
        if todo.get(f):
            todo[f] -= 1
            if not todo[f]:
                del todo[f]
            drop.append(comp)
    if todo:
        raise UsageError("graph lacks the copies the plan deletes")
    dead = np.zeros(g.n, dtype=bool)
    for comp in drop:
        dead[comp] = True
    e = g.edges()
    keep = e[~dead[e[:, 0]]] if len(e) else e
    return Graph.from_edges(g.n, keep, d=g.d), int(len(e) - len(keep))


# -- the tester ----------------------------------------------------------------

@dataclass(frozen=True)
class PropertySpec:
    vectors: tuple[CountVector, ...]
    k: int
    d: int
    eps: float

    def __post_init__(self):
        if not self.vectors:
            raise UsageError("a property needs at least one count vector")
        check_fraction(self.eps, "eps")
        for v in self.vectors:
            if any(f.n > self.k for f in v.counts):
                raise UsageError("property vector uses a form larger than k")

    @classmethod
    def from_graphs(cls, graphs, eps: float, k: int | None = None) -> "PropertySpec":
        graphs = list(graphs)
        if not graphs:
            raise UsageError("need at least one graph with the property")
        if k is None:
            k = max(max((len(c) for c in g.components()), default=1) for g in graphs)
        d = max(g.d for g in graphs)
        return cls(tuple(exact_count_vector(g, k) for g in graphs), int(k), d, eps)

    @property
    def buckets(self) -> int:
        return max(len(set().union(*(v.support for v in self.vectors))), 1)

    @property
    def min_form_size(self) -> int:
        return min((f.n for v in self.vectors for f in v.support), default=1)


@dataclass(frozen=True)
class TesterVerdict:
    accept: bool
    phase: int
    queries_used: int
    estimate: CountVector | None
    distance: float | None = None
    radius: float | None = None
    notes: dict = field(default_factory=dict)


def run_property_tester(g: Graph, spec: PropertySpec, seed=None, *, oracle_factory=None,
                        phase1_samples: int | None = None, samples: int | None = None,
                        n_seeds: int = N_SEEDS) -> TesterVerdict:
    """Two-phase tester: cut-edge screening, then count-vector comparison.

    Phase 1 tries up to ``n_seeds`` seeds; a seed passes when its sampled cut
    fraction is at most eps/4 and no block overflows. Phase 2 estimates the
    count vector with delta = eps/(4kd) and accepts iff some property vector lies
    within eps*n/(2kd) in l1.
    """
    check_graph(g)
    eps, k, d = spec.eps, spec.k, g.d
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = ss.spawn(n_seeds + 1)
    factory = oracle_factory or (lambda graph, kk, s: TrivialPartitionOracle(graph, kk))
    ledger = QueryLedger()
    chosen = None
    tried = 0
    for r in range(n_seeds):
        tried += 1
        oracle = factory(g, k, streams[r])
        try:
            est = cut_edge_estimate(g, oracle, eps, trials=phase1_samples or phase_one_samples(eps),
                                    seed=streams[r], ledger=ledger)
        except ComponentOverflow:
            continue
        if est.accept:
            chosen = oracle
            break
    if chosen is None:
        return TesterVerdict(False, 1, ledger.neighbor_queries, None, notes={"seeds_tried": tried})
    delta = eps / (4 * k * d)
    result = estimate_count_vector(g, chosen, k, delta, spec.buckets, seed=streams[-1],
                                   ledger=ledger, t_min=spec.min_form_size, samples=samples)
    if result.overflow:
        return TesterVerdict(False, 2, ledger.neighbor_queries, None,
                             notes={"seeds_tried": tried, "overflow": True})
    radius = eps * g.n / (2 * k * d)
    dist = min(result.vector.l1(w) for w in spec.vectors)
    return TesterVerdict(dist <= radius, 2, ledger.neighbor_queries, result.vector, dist, radius,
                         notes={"seeds_tried": tried, "samples": result.samples})


class PropertyTester(BaseEstimator):
    """Estimator front end: ``fit`` on graphs with the property, ``predict`` verdicts.

    ``predict`` returns 1 for accept and 0 for reject, one seed per input
    drawn from ``random_state``.
    """

    def __init__(self, eps: float = 0.25, k: int | None = None, n_seeds: int = N_SEEDS,
                 phase1_samples: int | None = None, samples: int | None = None,
                 random_state=None):
        self.eps = eps
        self.k = k
        self.n_seeds = n_seeds
        self.phase1_samples = phase1_samples
        self.samples = samples
        self.random_state = random_state

    def fit(self, graphs, y=None):
        if isinstance(graphs, Graph):
            graphs = [graphs]
        self.spec_ = PropertySpec.from_graphs(graphs, self.eps, self.k)
        return self

    def test(self, g: Graph, seed=None) -> TesterVerdict:
        if not hasattr(self, "spec_"):
            raise UsageError("call fit before testing")
        return run_property_tester(g, self.spec_, seed, n_seeds=self.n_seeds,
                                   phase1_samples=self.phase1_samples, samples=self.samples)

    def predict(self, graphs) -> np.ndarray:
        if isinstance(graphs, Graph):
            graphs = [graphs]
        ss = (self.random_state if isinstance(self.random_state, np.random.SeedSequence)
              else np.random.SeedSequence(self.random_state))
        seeds = ss.spawn(len(graphs))
        self.verdicts_ = [self.test(g, s) for g, s in zip(graphs, seeds)]
        return np.array([int(v.accept) for v in self.verdicts_], dtype=np.int64)
