"""Acceptance checks, one recorded PASS/FAIL line per criterion.

Each test records its verdict through the ``criterion`` fixture before
asserting, so the terminal summary lists every criterion even when some fail.
"""

from __future__ import annotations

import time
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from oracles import brute_isomorphism, brute_separator
from planarprop.canon import canonical_form
from planarprop.cli import growth_checks, main
from planarprop.distinguisher import empirical_sample_complexity
from planarprop.experiments import certified_farness, run_ordered
from planarprop.experiments import tester_trials as run_tester_trials
from planarprop.families import build_yes_instance, take_scoops
from planarprop.graph import Graph
from planarprop.grids import (GridParams, all_codes, build_base_graph, build_diagonal_graph,
                              corner_signature, corners, hamming, hamming_ball_bound,
                              is_three_connected)
from planarprop.partition import TrivialPartitionOracle, decompose, min_balanced_separator
from planarprop.tester import (K1, CountVector, PropertySpec, apply_plan, equalize_edit_sequence,
                               estimate_count_vector, exact_count_vector, materialize)
from planarprop.trees import dedupe_unrooted, enumerate_rooted_trees, random_bounded_tree

EPS = 0.25
M = 10


@pytest.fixture(scope="module")
def family4():
    return take_scoops(GridParams(4, gadgets=False), 2, symmetry="dihedral").even()


def test_c1_gadgetless_s4_forms_distinct(criterion):
    t0 = time.perf_counter()
    p = GridParams(4, gadgets=False)
    codes = all_codes(p.n_cells)
    graphs = [build_diagonal_graph(p, c) for c in codes]
    forms = [canonical_form(g) for g in graphs]
    rng = np.random.default_rng(1)
    # half the pairs drawn from equal forms so both verdicts get exercised
    by_form: dict = {}
    for i, f in enumerate(forms):
        by_form.setdefault(f, []).append(i)
    twins = [v for v in by_form.values() if len(v) > 1]
    pairs = [tuple(rng.choice(len(codes), 2, replace=False)) for _ in range(25)]
    pairs += [tuple(rng.choice(twins[rng.integers(len(twins))], 2, replace=False))
              for _ in range(25)]
    agree = sum((forms[i] == forms[j])
                == (brute_isomorphism(graphs[i].adjacency(), graphs[j].adjacency()) is not None)
                for i, j in pairs)
    elapsed = time.perf_counter() - t0
    distinct = len(set(forms))
    ok = distinct == 512 and agree == 50 and elapsed < 60
    criterion("C1 non-isomorphism s=4", ok,
              f"{distinct}/512 distinct forms, {agree}/50 brute-force agreements, {elapsed:.1f}s")
    assert agree == 50
    assert distinct == 512


@pytest.mark.parametrize("s", [4, 5])
def test_c2_take_scoops_certificate(criterion, s):
    t0 = time.perf_counter()
    p = GridParams(s, gadgets=False)
    radius = p.default_radius()
    f = take_scoops(p, radius, dedupe=False)
    codes = list(f.codes)
    min_h = min(hamming(a, b) for a, b in combinations(codes, 2))
    bound = hamming_ball_bound(p.n_cells, radius)
    elapsed = time.perf_counter() - t0
    ok = min_h > radius and len(f) >= bound and elapsed < 60
    criterion(f"C2 take-scoops s={s}", ok,
              f"radius {radius}, min Hamming {min_h}, |F|={len(f)} >= {bound:.2f}, {elapsed:.1f}s")
    assert ok


def test_c3_separator_floor(criterion, family4):
    t0 = time.perf_counter()
    sizes, agree = [], 0
    for g in family4.members:
        r = min_balanced_separator(g, 2 / 3)
        sizes.append(r.size if r.exact else -1)
        G = nx.Graph(list(map(tuple, g.edges().tolist())))
        G.add_nodes_from(range(g.n))
        agree += brute_separator(G, 1 / 3) == r.size
    elapsed = time.perf_counter() - t0
    ok = min(sizes) >= 4 and agree == len(sizes) and elapsed < 300
    criterion("C3 separator floor s=4", ok,
              f"exact separators {sorted(set(sizes))} over {len(sizes)} members, "
              f"oracle agreement {agree}/{len(sizes)}, {elapsed:.1f}s")
    assert ok


def test_c4_base_graph_rigidity(criterion):
    t0 = time.perf_counter()
    p = GridParams(12)
    base = build_base_graph(p)
    three = is_three_connected(base)
    sigs = {r: corner_signature(base, p.vid(*c)) for r, c in corners(p.s).items()}
    distinct = len(set(sigs.values())) == 4
    elapsed = time.perf_counter() - t0
    ok = three and distinct and elapsed < 120
    criterion("C4 base-graph rigidity s=12", ok,
              f"3-connected={three}, corner signatures {sorted(sigs.values())}, {elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def tester_runs(family4):
    t0 = time.perf_counter()
    trials = run_tester_trials(family4, EPS, M, 200, seed=0)
    return trials, time.perf_counter() - t0


def test_c5_tester_completeness(criterion, tester_runs):
    trials, elapsed = tester_runs
    acc = sum(t.yes_accept for t in trials)
    ok = acc / len(trials) >= 2 / 3 and elapsed < 600
    criterion("C5a tester YES acceptance", ok, f"{acc}/{len(trials)} accepted, {elapsed:.1f}s")
    assert ok


def test_c5_tester_soundness(criterion, tester_runs):
    trials, elapsed = tester_runs
    rej = sum(not t.no_accept for t in trials)
    ok = rej / len(trials) >= 2 / 3 and elapsed < 600
    criterion("C5b tester NO rejection", ok, f"{rej}/{len(trials)} rejected, {elapsed:.1f}s")
    assert ok


def test_c5_certified_farness(criterion, family4):
    far = certified_farness(family4, M, seed=0)
    ok = far.normalized >= EPS
    criterion("C5c certified NO farness", ok,
              f"{far.edits} edits certified, {far.normalized:.4f} of d*n={far.d * far.n} "
              f"vs eps={EPS}")
    assert ok


def _random_count_vector(rng, forms, k):
    picks = rng.choice(len(forms), size=rng.integers(1, 5), replace=False)
    return {forms[i]: int(rng.integers(0, 6)) for i in picks}


def test_c6_equalization_bound(criterion):
    atlas = [G for G in nx.graph_atlas_g()[1:]
             if G.number_of_nodes() <= 5 and nx.is_connected(G)
             and max(dict(G.degree()).values(), default=0) <= 4]
    forms = sorted({canonical_form(Graph.from_edges(G.number_of_nodes(), list(G.edges()), d=4))
                    for G in atlas})
    k, d = 5, 4
    rng = np.random.default_rng(6)
    violations = mismatched = 0
    for _ in range(100):
        a, b = _random_count_vector(rng, forms, k), _random_count_vector(rng, forms, k)
        na = sum(f.n * c for f, c in a.items())
        nb = sum(f.n * c for f, c in b.items())
        n = max(na, nb) + int(rng.integers(0, 4))
        c1 = CountVector({**a, K1: a.get(K1, 0) + n - na}, n)
        c2 = CountVector({**b, K1: b.get(K1, 0) + n - nb}, n)
        g1, g2 = materialize(c1, d), materialize(c2, d)
        plan = equalize_edit_sequence(exact_count_vector(g1), exact_count_vector(g2), k, d)
        h1, e1 = apply_plan(g1, plan, 1)
        h2, e2 = apply_plan(g2, plan, 2)
        bound = exact_count_vector(g1).l1(exact_count_vector(g2)) * k * d
        violations += e1 + e2 > bound
        mismatched += exact_count_vector(h1) != exact_count_vector(h2)
    ok = violations == 0 and mismatched == 0
    criterion("C6 equalization bound", ok,
              f"{violations} bound violations, {mismatched} unequal results over 100 pairs")
    assert ok


def test_c7_estimate_calibration(criterion, family4):
    g = build_yes_instance(family4, M, 0)
    spec = PropertySpec.from_graphs([g], EPS, k=family4.t)
    exact = exact_count_vector(g, spec.k)
    delta = EPS / (4 * spec.k * g.d)
    seeds = np.random.SeedSequence(7).spawn(100)
    errors = []
    for s in seeds:
        est = estimate_count_vector(g, TrivialPartitionOracle(g, spec.k), spec.k, delta,
                                    spec.buckets, seed=s, t_min=spec.min_form_size)
        errors.append(est.vector.l1(exact))
    good = sum(e < delta * g.n for e in errors)
    ok = good >= 95
    criterion("C7 count-vector calibration", ok,
              f"{good}/100 within delta*n={delta * g.n:.3f}, worst {max(errors):.3f}")
    assert ok


def _sweep_one(f, seq):
    return empirical_sample_complexity([f], 200, seed=seq)[0]


def test_c8_sample_complexity_growth(criterion):
    t0 = time.perf_counter()
    fams = [take_scoops(GridParams(s, gadgets=False), 1, symmetry="dihedral").even()
            for s in (3, 4, 5)]
    seqs = np.random.SeedSequence(8).spawn(3)
    rows = run_ordered(_sweep_one, list(zip(fams, seqs)))
    checks = growth_checks(rows)
    elapsed = time.perf_counter() - t0
    ok = checks["increasing"] and checks["ratios_ok"] and elapsed < 900
    criterion("C8 collision sample complexity", ok,
              f"|F|={[r.family_size for r in rows]} q*={[r.q_star for r in rows]} "
              f"ratios/sqrt={[round(x, 2) for x in checks['ratios']]}, {elapsed:.0f}s")
    assert ok


def test_c9_decomposition_budget(criterion):
    eps, tau, d, n = 0.1, 1, 3, 10_000
    bad, worst_block, worst_removed, worst_leaves = 0, 0, 0, 0
    for seq in np.random.SeedSequence(9).spawn(20):
        g = random_bounded_tree(n, d, seq)
        p = decompose(g, eps, tau)
        removed, leaves = p.stats["removed_edges"], p.stats["leaves"]
        worst_block = max(worst_block, p.max_block())
        worst_removed = max(worst_removed, removed)
        worst_leaves = max(worst_leaves, leaves)
        bad += bool(p.problems(g)) or p.max_block() > 60 or removed > eps * d * n \
            or leaves > eps * n / (2 * tau)
    ok = bad == 0
    criterion("C9 decomposition budget", ok,
              f"{bad} violations; worst block {worst_block}, removed {worst_removed}, "
              f"leaves {worst_leaves} over 20 trees")
    assert ok


def test_c10_tree_family_growth(criterion):
    rooted = {s: enumerate_rooted_trees(s) for s in range(1, 15)}
    orbit_fail = [s for s in range(1, 15)
                  if len(dedupe_unrooted(rooted[s]).members) * s < len(rooted[s])]
    growth_fail = [s for s in range(6, 14) if len(rooted[s + 1]) < 1.5 * len(rooted[s])]
    ok = not orbit_fail and not growth_fail
    criterion("C10 tree family", ok,
              f"orbit bound fails at {orbit_fail}, growth fails at {growth_fail}; "
              f"rooted(14)={len(rooted[14])}")
    assert ok


CLI_RUNS = {
    "family-build": ["family-build", "--s", "4", "--radius", "2", "--symmetry", "none"],
    "tree-family": ["tree-family", "--s", "9"],
    "verify-suitable": ["verify-suitable", "--family", "{family}", "--eps", "0.25"],
    "test-run": ["test-run", "--s", "3", "--radius", "1", "--m", "3", "--trials", "6",
                 "--samples", "20000", "--seed", "3"],
    "distinguish-sweep": ["distinguish-sweep", "--s", "3", "4", "--trials", "50", "--seed", "4"],
    "decompose-demo": ["decompose-demo", "--n", "3000", "--count", "2", "--seed", "5"],
}


def test_c11_cli_determinism(criterion, tmp_path):
    family = tmp_path / "fam3"
    assert main(["family-build", "--s", "3", "--radius", "1", "--out", str(family)]) == 0
    differing = []
    for name, argv in CLI_RUNS.items():
        argv = [a.format(family=family) for a in argv]
        outs = []
        for rep in range(2):
            out = tmp_path / f"{name}-{rep}"
            main([*argv, "--out", str(out)])
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if outs[0] != outs[1] or not outs[0]:
            differing.append(name)
    ok = not differing
    criterion("C11 CLI determinism", ok,
              f"{len(CLI_RUNS) - len(differing)}/{len(CLI_RUNS)} subcommands byte-identical"
              + (f", differing: {differing}" if differing else ""))
    assert ok
