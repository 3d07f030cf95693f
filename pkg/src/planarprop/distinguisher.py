"""Component sampling and the collision distinguisher for YES vs NO instances.

A YES graph holds equally many copies of every family member; a NO graph
holds twice as many copies of a random half of them. Sampling uniform
components and counting pairwise repeats of their isomorphism types tells
the two apart once the collision count separates the two expectations.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import UsageError, check_graph, check_positive_int, check_rng
from .canon import CanonicalForm, canonical_form
from .families import SuitableFamily, build_no_instance
from .graph import Graph, QueryLedger, explore_component
from .results import wilson_interval

TARGET = 2 / 3


class ComponentSampler:
    """Uniform components of a graph whose non-padding components share size t.

    A uniform non-padding vertex lands in a uniform component because the
    sizes are equal. Each draw pays for exploring the component.
    """

    def __init__(self, g: Graph, seed=None, t: int | None = None,
                 ledger: QueryLedger | None = None):
        self.g = check_graph(g)
        self.rng = check_rng(seed)
        self.ledger = QueryLedger() if ledger is None else ledger
        k, labels = g.component_labels()
        sizes = np.bincount(labels, minlength=k)
        if t is None:
            t = int(sizes.max()) if k else 0
        if not k or t < 1:
            raise UsageError("graph has no components to sample")
        keep = sizes[labels] == t
        bad = (sizes != t) & ~((sizes == 1) & (t > 1))
        if np.any(bad):
            raise UsageError(f"components of sizes {sorted(set(sizes[bad].tolist()))} "
                             f"differ from t={t}")
        self.t = t
        self.pool = np.flatnonzero(keep)
        self._forms: dict[int, CanonicalForm] = {}
        self._labels = labels

    def draw(self, q: int) -> list[CanonicalForm]:
        out = []
        for v in self.pool[self.rng.integers(0, len(self.pool), size=q)].tolist():
            lab = int(self._labels[v])
            form = self._forms.get(lab)
            if form is None:
                view = explore_component(self.g, self.ledger, v, self.t)
                form = canonical_form(view.as_graph(self.g.d))
                self._forms[lab] = form
            else:
                self.ledger.charge(self.g.d * self.t, [v])
            out.append(form)
        return out

    def __iter__(self):
        while True:
            yield self.draw(1)[0]


def component_sampler(g: Graph, seed=None, t: int | None = None) -> ComponentSampler:
    return ComponentSampler(g, seed, t)


@dataclass(frozen=True)
class DistinguisherOutcome:
    guess: str  # "YES" or "NO"
    samples_used: int
    collision_statistic: int
    threshold: float


def collision_count(forms) -> int:
    return sum(c * (c - 1) // 2 for c in Counter(forms).values())


def collision_threshold(q: int, family_size: int) -> float:
    """Midpoint of the expected collisions q(q-1)/(2|F|) and q(q-1)/|F|."""
    return 0.75 * q * (q - 1) / family_size


def collision_distinguisher(stream, q: int, family_size: int) -> DistinguisherOutcome:
    """Guess NO iff the first q forms collide more often than the midpoint."""
    check_positive_int(q, "q", minimum=2)
    check_positive_int(family_size, "family_size")
    if isinstance(stream, ComponentSampler):
        forms = stream.draw(q)
    else:
        forms = list(stream)[:q]
    if len(forms) < q:
        raise UsageError(f"stream ended after {len(forms)} of {q} samples")
    stat = collision_count(forms)
    thr = collision_threshold(q, family_size)
    return DistinguisherOutcome("NO" if stat > thr else "YES", q, stat, thr)


def prefix_collisions(codes: np.ndarray) -> np.ndarray:
    """Collision counts of every prefix: out[q] counts repeats among codes[:q]."""
    seen: Counter = Counter()
    out = np.zeros(len(codes) + 1, dtype=np.int64)
    total = 0
    for i, c in enumerate(codes.tolist()):
        total += seen[c]
        seen[c] += 1
        out[i + 1] = total
    return out


class CollisionDistinguisher(BaseEstimator):
    """Estimator front end over pre-drawn form sequences; 1 means NO."""

    def __init__(self, q: int = 2, family_size: int = 2):
        self.q = q
        self.family_size = family_size

    def fit(self, X=None, y=None):
        check_positive_int(self.q, "q", minimum=2)
        check_positive_int(self.family_size, "family_size")
        self.threshold_ = collision_threshold(self.q, self.family_size)
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.array([collision_count(list(x)[:self.q]) for x in X], dtype=np.float64)

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "threshold_"):
            self.fit()
        return (self.decision_function(X) > self.threshold_).astype(np.int64)


# -- sample-complexity sweep ---------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    family_size: int
    t: int
    n: int
    q_star: int | None
    yes_rate: float | None
    no_rate: float | None
    yes_ci: tuple[float, float] | None
    no_ci: tuple[float, float] | None
    trials: int
    q_max: int
    flagged: bool
    note: str


def default_q_max(family_size: int) -> int:
    return 2 * ceil(sqrt(8 * family_size)) + 4


def success_curves(f: SuitableFamily, trials: int, q_max: int, *, m: int = 1,
                   seed=None) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-q success rates of the collision rule on fresh YES and NO instances.

    Each trial draws one stream of q_max components from a freshly labeled
    YES graph and one from a fresh NO graph (new half set R); the rate at q
    uses the first q draws of every stream.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    fsize = len(f)
    qs = np.arange(q_max + 1)
    thr = 0.75 * qs * (qs - 1) / fsize
    yes_ok = np.zeros(q_max + 1, dtype=np.int64)
    no_ok = np.zeros(q_max + 1, dtype=np.int64)
    n = 0
    for trial_seq in ss.spawn(trials):
        s_pair, s_yes, s_no = trial_seq.spawn(3)
        pair = build_no_instance(f, m, s_pair)
        n = pair.yes_graph.n
        codes = []
        for g, s in ((pair.yes_graph, s_yes), (pair.no_graph, s_no)):
            forms = ComponentSampler(g, s, f.t).draw(q_max)
            index = {x: i for i, x in enumerate(sorted(set(forms)))}
            codes.append(np.array([index[x] for x in forms], dtype=np.int64))
        yes_ok += prefix_collisions(codes[0]) <= thr
        no_ok += prefix_collisions(codes[1]) > thr
    return yes_ok / trials, no_ok / trials, n


def empirical_sample_complexity(families: list[SuitableFamily], trials: int = 200, *,
                                target: float = TARGET, q_max: int | None = None,
                                m: int = 1, seed=None) -> list[SweepRow]:
    """Least q at which both YES and NO success rates reach ``target``, per family.

    q is scanned upward from 2 over shared sample streams. A row is flagged
    when some larger q falls below target by more than three binomial
    standard errors, or when no q up to q_max succeeds.
    """
    check_positive_int(trials, "trials")
    if not families:
        raise UsageError("empty family list")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rows = []
    slack = 3 * sqrt(target * (1 - target) / trials)
    for f, fseq in zip(families, ss.spawn(len(families))):
        size = len(f)
        if size < 2:
            rows.append(SweepRow(size, f.t, 0, None, None, None, None, None, trials, 0, True,
                                 "degenerate: a single form admits no NO instance"))
            continue
        f = f.even()
        qm = default_q_max(len(f)) if q_max is None else q_max
        yes, no, n = success_curves(f, trials, qm, m=m, seed=fseq)
        ok = (yes >= target) & (no >= target)
        ok[:2] = False
        hits = np.flatnonzero(ok)
        if not len(hits):
            rows.append(SweepRow(len(f), f.t, n, None, None, None, None, None, trials, qm, True,
                                 f"no q <= {qm} reached the target"))
            continue
        q_star = int(hits[0])
        later = slice(q_star, qm + 1)
        dips = (yes[later] < target - slack) | (no[later] < target - slack)
        flagged = bool(dips.any())
        y, nn = yes[q_star], no[q_star]
        rows.append(SweepRow(len(f), f.t, n, q_star, float(y), float(nn),
                             wilson_interval(round(y * trials), trials),
                             wilson_interval(round(nn * trials), trials),
                             trials, qm, flagged, "non-monotone success curve" if flagged else ""))
    return rows
