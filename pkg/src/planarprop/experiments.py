"""Trial loops shared by the command line and the acceptance suite."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .edit_distance import component_matching_bound
from .families import SuitableFamily, build_no_instance, build_yes_instance
from .tester import PropertySpec, run_property_tester


def run_ordered(fn, jobs_args: list, jobs: int = 1) -> list:
    """Map ``fn`` over argument tuples; results come back in input order."""
    if jobs <= 1 or len(jobs_args) <= 1:
        return [fn(*a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, *zip(*jobs_args)))


@dataclass(frozen=True)
class TesterTrial:
    index: int
    yes_accept: bool
    no_accept: bool
    yes_queries: int
    no_queries: int
    yes_distance: float | None
    no_distance: float | None


def _tester_trial(index: int, f: SuitableFamily, spec: PropertySpec, m: int,
                  seq: np.random.SeedSequence, samples: int | None) -> TesterTrial:
    s_pair, s_yes, s_no = seq.spawn(3)
    pair = build_no_instance(f, m, s_pair)
    vy = run_property_tester(pair.yes_graph, spec, s_yes, samples=samples)
    vn = run_property_tester(pair.no_graph, spec, s_no, samples=samples)
    return TesterTrial(index, vy.accept, vn.accept, vy.queries_used, vn.queries_used,
                       vy.distance, vn.distance)


def tester_spec(f: SuitableFamily, eps: float, m: int, seed=0) -> PropertySpec:
    h = build_yes_instance(f, m, seed)
    return PropertySpec.from_graphs([h], eps, k=f.t)


def tester_trials(f: SuitableFamily, eps: float, m: int, trials: int, seed=0, *,
                  jobs: int = 1, samples: int | None = None) -> list[TesterTrial]:
    """YES and NO tester runs on freshly drawn instances, one seed stream per trial."""
    f = f.even()
    spec = tester_spec(f, eps, m, seed)
    seqs = np.random.SeedSequence(seed).spawn(trials)
    args = [(i, f, spec, m, seqs[i], samples) for i in range(trials)]
    return run_ordered(_tester_trial, args, jobs)


@dataclass(frozen=True)
class Farness:
    edits: int
    normalized: float
    n: int
    d: int


def certified_farness(f: SuitableFamily, m: int, seed=0, budget: int = 200_000) -> Farness:
    """Certified edit lower bound between a YES and a NO instance, over d*n."""
    f = f.even()
    pair = build_no_instance(f, m, seed)
    edits = component_matching_bound(pair.yes_graph, pair.no_graph, budget)
    n, d = pair.no_graph.n, pair.no_graph.d
    return Farness(edits, edits / (d * n), n, d)
