"""Command-line entry point: ``planarprop <subcommand> [options]``.

Exit codes: 0 success, 1 a certification or assertion failed, 2 usage error.
Every output file embeds the configuration, seed and package version, and
reruns with the same configuration are byte-identical. Output goes to
``--out`` or, when omitted, to ``$PLANARPROP_OUT`` (default ``planarprop-out``).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from math import sqrt
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import ConstructionError, UsageError, check_fraction, check_positive_int
from .canon import canonical_form
from .distinguisher import TARGET, empirical_sample_complexity, success_curves
from .experiments import certified_farness, run_ordered, tester_trials
from .families import (SuitableFamily, check_suitable, load_family, save_family, take_scoops)
from .graph import Graph
from .grids import (GridParams, build_base_graph, corner_signature, corners, hamming_ball_bound,
                    is_three_connected)
from .partition import decompose, treewidth_partition
from .results import ResultRow, rows_to_csv, wilson_interval, write_json, write_text
from .trees import random_bounded_tree, tree_family

ENV_OUT = "PLANARPROP_OUT"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_HELP = ("CSV columns: experiment, s, family_size, n, q (sample or query budget), "
            "success_rate, ci_low, ci_high (95%% Wilson), seed. The first line is a "
            "'#' comment holding the version and configuration as JSON.")


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    values: dict

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ExperimentConfig":
        skip = {"func", "out", "jobs", "command"}
        values = {k: (str(v) if isinstance(v, Path) else v)
                  for k, v in sorted(vars(args).items()) if k not in skip}
        if "eps" in values and values["eps"] is not None:
            check_fraction(values["eps"], "eps", closed_right=True)
        if "trials" in values and values["trials"] is not None:
            check_positive_int(values["trials"], "trials")
        return cls(args.command, values)

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.values}


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(ENV_OUT, "planarprop-out"))


def _say(msg: str) -> None:
    print(msg, flush=True)


# -- family-build ----------------------------------------------------------------

def cmd_family_build(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    gadgets = args.s >= 12 if args.gadgets is None else args.gadgets
    p = GridParams(args.s, gadgets)
    symmetry = args.symmetry or ("none" if gadgets else "dihedral")
    radius = args.radius if args.radius is not None else p.default_radius()
    max_members = args.max_members
    if max_members is None and (1 << p.n_cells) > args.pool_budget:
        max_members = 64
    f = take_scoops(p, radius, pool_budget=args.pool_budget, seed=args.seed, symmetry=symmetry,
                    max_members=max_members, epsilon=args.eps, dedupe=not args.no_dedupe)
    forms = f.forms()
    cert = {
        "size": len(f),
        "min_pairwise_distance": f.min_pairwise_hamming,
        "metric": f.info["metric"],
        "distance_ok": len(f) < 2 or f.min_pairwise_hamming > radius,
        "forms_distinct": len(set(forms)) == len(forms),
        "ball_bound": hamming_ball_bound(p.n_cells, radius),
        "max_degree": max(int(g.degrees.max()) for g in f.members),
    }
    cert["degree_ok"] = cert["max_degree"] <= 8
    checks = ["distance_ok", "forms_distinct", "degree_ok"]
    if args.check_3conn:
        if not gadgets:
            raise UsageError("--check-3conn needs the corner gadgets (s >= 12)")
        base = build_base_graph(p)
        sigs = {str(r): list(corner_signature(base, p.vid(*c))) for r, c in corners(p.s).items()}
        cert["three_connected"] = is_three_connected(base)
        cert["corner_signatures"] = sigs
        cert["corners_distinct"] = len({tuple(v) for v in sigs.values()}) == 4
        checks += ["three_connected", "corners_distinct"]
    report = None
    if args.check_suitable:
        report = check_suitable(f, args.eps or f.epsilon, args.d)
        cert["suitable"] = report.ok
        checks.append("suitable")
    cert["ok"] = all(cert[c] for c in checks)
    out = _out_dir(args)
    save_family(f, out, report=report, extra={"config": cfg.as_dict(), "certificate": cert})
    _say(f"family: {len(f)} members on t={f.t} vertices, min {f.info['metric']} "
         f"{f.min_pairwise_hamming} (radius {radius}) -> {out}")
    for c in checks:
        _say(f"  {c}: {'ok' if cert[c] else 'FAILED'}")
    return EXIT_OK if cert["ok"] else EXIT_FAIL


# -- tree-family ---------------------------------------------------------------

def cmd_tree_family(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    f = tree_family(args.s)
    forms = f.forms()
    cert = {
        "rooted": f.info["rooted_count"], "unrooted": len(f), "max_orbit": f.info["max_orbit"],
        "orbit_ok": f.info["max_orbit"] <= args.s,
        "count_ok": len(f) * args.s >= f.info["rooted_count"],
        "forms_distinct": len(set(forms)) == len(forms),
        "degree_ok": all(int(g.degrees.max(initial=0)) <= 3 for g in f.members),
    }
    cert["ok"] = all(cert[k] for k in ("orbit_ok", "count_ok", "forms_distinct", "degree_ok"))
    out = _out_dir(args)
    save_family(f, out, extra={"config": cfg.as_dict(), "certificate": cert})
    _say(f"trees s={args.s}: {cert['rooted']} rooted, {cert['unrooted']} unrooted, "
         f"largest orbit {cert['max_orbit']} -> {out}")
    return EXIT_OK if cert["ok"] else EXIT_FAIL


# -- verify-suitable -----------------------------------------------------------

def cmd_verify_suitable(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    f = load_family(args.family)
    if not len(f):
        raise UsageError("empty family")
    eps = args.eps if args.eps is not None else f.epsilon
    d = args.d if args.d is not None else f.d
    report = check_suitable(f, eps, d, separator_c=args.c)
    out = _out_dir(args)
    write_json(out / "suitability.json", {"report": report.to_dict(), "eps": eps, "d": d},
               cfg.as_dict())
    _say(f"suitability of {len(f)} members: {'ok' if report.ok else 'FAILED'} "
         f"(min normalized distance {report.min_normalized_distance}, "
         f"separators {sorted(set(report.separators))}, threshold {report.separator_threshold})")
    return EXIT_OK if report.ok else EXIT_FAIL


# -- test-run --------------------------------------------------------------------

def _family_from_args(args) -> SuitableFamily:
    if args.family:
        return load_family(args.family)
    return take_scoops(GridParams(args.s, args.s >= 12), args.radius,
                       symmetry="none" if args.s >= 12 else "dihedral", seed=args.seed)


def cmd_test_run(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    f = _family_from_args(args).even()
    if len(f) < 2:
        raise UsageError("the tester experiment needs a family with at least two members")
    trials = tester_trials(f, args.eps, args.m, args.trials, args.seed, jobs=args.jobs,
                           samples=args.samples)
    n = f.t * len(f) * args.m
    acc = sum(t.yes_accept for t in trials)
    rej = sum(not t.no_accept for t in trials)
    s_val = f.info.get("s")
    rows = [
        ResultRow("test-yes-accept", s_val, len(f), n, int(np.mean([t.yes_queries for t in trials])),
                  acc / args.trials, *wilson_interval(acc, args.trials), args.seed),
        ResultRow("test-no-reject", s_val, len(f), n, int(np.mean([t.no_queries for t in trials])),
                  rej / args.trials, *wilson_interval(rej, args.trials), args.seed),
    ]
    payload = {"family_size": len(f), "t": f.t, "n": n,
               "yes_accept_rate": acc / args.trials, "no_reject_rate": rej / args.trials,
               "trials": [t.__dict__ for t in trials]}
    ok = acc / args.trials >= TARGET and rej / args.trials >= TARGET
    if args.farness:
        far = certified_farness(f, args.m, args.seed)
        payload["farness"] = far.__dict__
        payload["farness_ok"] = far.normalized >= args.farness_multiplier * args.eps
        ok = ok and payload["farness_ok"]
    out = _out_dir(args)
    write_text(out / "test_run.csv", rows_to_csv(rows, cfg.as_dict()))
    write_json(out / "test_run.json", payload, cfg.as_dict())
    _say(f"YES accepted {acc}/{args.trials}, NO rejected {rej}/{args.trials}"
         + (f", certified farness {payload['farness']['normalized']:.4f}" if args.farness else "")
         + f" -> {out}")
    return EXIT_FAIL if args.assert_ and not ok else EXIT_OK


# -- distinguish-sweep -----------------------------------------------------------

def _sweep_families(args) -> list[SuitableFamily]:
    fams = []
    if args.family:
        fams = [load_family(p) for p in args.family]
    else:
        for s in args.s:
            fams.append(take_scoops(GridParams(s, False), args.radius, symmetry="dihedral",
                                    seed=args.seed))
    if not fams or any(len(f) == 0 for f in fams):
        raise UsageError("empty family")
    return fams


def _qfixed_cell(f: SuitableFamily, trials: int, q: int, m: int, seq) -> tuple:
    yes, no, n = success_curves(f, trials, q, m=m, seed=seq)
    return float(yes[q]), float(no[q]), n


def analytic_q2(family_size: int) -> tuple[float, float]:
    """Exact YES/NO success of the collision rule at q = 2."""
    if 1 > 1.5 / family_size:  # one collision already exceeds the threshold
        return 1 - 1 / family_size, 2 / family_size
    return 1.0, 0.0


def cmd_distinguish_sweep(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    fams = [f.even() for f in _sweep_families(args)]
    seqs = np.random.SeedSequence(args.seed).spawn(len(fams))
    out = _out_dir(args)
    rows, payload = [], {}
    if args.qfixed is not None:
        check_positive_int(args.qfixed, "qfixed", minimum=2)
        cells = run_ordered(_qfixed_cell, [(f, args.trials, args.qfixed, args.m, s)
                                           for f, s in zip(fams, seqs)], args.jobs)
        table = []
        for f, (yes, no, n) in zip(fams, cells):
            ay, an = analytic_q2(len(f)) if args.qfixed == 2 else (None, None)
            table.append({"family_size": len(f), "yes_rate": yes, "no_rate": no,
                          "analytic_yes": ay, "analytic_no": an})
            for name, rate in (("qfixed-yes", yes), ("qfixed-no", no)):
                k = round(rate * args.trials)
                rows.append(ResultRow(name, f.info.get("s"), len(f), n, args.qfixed, rate,
                                      *wilson_interval(k, args.trials), args.seed))
            _say(f"|F|={len(f)} q={args.qfixed}: YES {yes:.3f} NO {no:.3f}"
                 + (f" (analytic {ay:.3f} / {an:.3f})" if ay is not None else ""))
        payload["qfixed"] = table
        ok = True
    else:
        results = run_ordered(_sweep_one, [(f, args.trials, args.q_max, args.m, s)
                                           for f, s in zip(fams, seqs)], args.jobs)
        table = []
        for f, r in zip(fams, results):
            table.append(r.__dict__)
            rate = None if r.yes_rate is None else min(r.yes_rate, r.no_rate)
            lo = None if r.yes_ci is None else min(r.yes_ci[0], r.no_ci[0])
            hi = None if r.yes_ci is None else min(r.yes_ci[1], r.no_ci[1])
            rows.append(ResultRow("distinguish-qstar", f.info.get("s"), r.family_size, r.n,
                                  r.q_star, rate, lo, hi, args.seed))
            _say(f"|F|={r.family_size}: q*={r.q_star}" + (f"  [{r.note}]" if r.note else ""))
        checks = growth_checks(results)
        payload["sweep"] = table
        payload["checks"] = checks
        ok = checks["increasing"] and checks["ratios_ok"]
    write_text(out / "sweep.csv", rows_to_csv(rows, cfg.as_dict()))
    write_json(out / "sweep.json", payload, cfg.as_dict())
    return EXIT_FAIL if args.assert_ and not ok else EXIT_OK


def _sweep_one(f, trials, q_max, m, seq):
    return empirical_sample_complexity([f], trials, q_max=q_max, m=m, seed=seq)[0]


def growth_checks(rows) -> dict:
    """Strict growth of q* and q* ratios within [1/4, 4] of the square-root ratio."""
    qs = [r.q_star for r in rows]
    sizes = [r.family_size for r in rows]
    if any(q is None for q in qs):
        return {"increasing": False, "ratios_ok": False, "ratios": []}
    ratios = []
    for (a, qa), (b, qb) in zip(zip(sizes, qs), zip(sizes[1:], qs[1:])):
        ratios.append((qb / qa) / sqrt(b / a))
    return {"increasing": all(b > a for a, b in zip(qs, qs[1:])),
            "ratios": ratios, "ratios_ok": all(0.25 <= x <= 4 for x in ratios)}


# -- decompose-demo --------------------------------------------------------------

def _demo_graphs(args) -> list[tuple[str, Graph]]:
    seqs = np.random.SeedSequence(args.seed).spawn(args.count)
    if args.graph == "tree":
        return [(f"tree{i:03d}", random_bounded_tree(args.n, args.d, s)) for i, s in enumerate(seqs)]
    if args.graph == "path":
        return [("path", Graph.from_edges(args.n, [(i, i + 1) for i in range(args.n - 1)],
                                          d=args.d))]
    if not args.file:
        raise UsageError("--graph file needs --file")
    return [(Path(args.file).stem, Graph.from_text(Path(args.file).read_text()))]


def cmd_decompose_demo(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    out = _out_dir(args)
    reports, ok = [], True
    for name, g in _demo_graphs(args):
        if args.method == "decompose":
            part = decompose(g, args.eps, args.tau)
            block_bound = 6 * args.tau / args.eps
        else:
            part = treewidth_partition(g, args.eps, args.tau)
            block_bound = 30 * args.tau / args.eps
        problems = part.problems(g)
        removed = part.stats.get("removed_edges", part.cut_edges)
        budget = args.eps * g.d * g.n
        rep = {
            "graph": name, "n": g.n, "d": g.d, "blocks": part.n_blocks,
            "max_block": part.max_block(), "block_bound": block_bound,
            "cut_edges": part.cut_edges, "removed_edges": removed, "edge_budget": budget,
            "leaves": part.stats.get("leaves"),
            "leaf_bound": args.eps * g.n / (2 * args.tau) if args.method == "decompose" else None,
            "problems": problems,
        }
        rep["ok"] = (not problems and part.max_block() <= block_bound and removed <= budget
                     and (rep["leaf_bound"] is None or rep["leaves"] <= rep["leaf_bound"]))
        ok = ok and rep["ok"]
        reports.append(rep)
        write_text(out / f"partition_{name}.txt", part.to_text())
        _say(f"{name}: {part.n_blocks} blocks, max {part.max_block()} (bound {block_bound:g}), "
             f"removed {removed} (budget {budget:g}) {'ok' if rep['ok'] else 'FAILED'}")
    write_json(out / "decompose.json", {"reports": reports, "ok": ok}, cfg.as_dict())
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="planarprop", description=__doc__.split("\n")[0],
                                 epilog=CSV_HELP)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
        p.add_argument("--out", type=Path, default=None,
                       help=f"output directory (default ${ENV_OUT} or ./planarprop-out)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("family-build", help="greedy grid family archive", epilog=CSV_HELP)
    common(p)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--radius", type=int, default=None, help="default ceil(0.16 s^2)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gadgets", dest="gadgets", action="store_true", default=None)
    g.add_argument("--gadgetless", dest="gadgets", action="store_false")
    p.add_argument("--symmetry", choices=["none", "dihedral"], default=None,
                   help="code metric (default: dihedral without gadgets, none with)")
    p.add_argument("--pool-budget", type=int, default=1 << 20)
    p.add_argument("--max-members", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--no-dedupe", action="store_true")
    p.add_argument("--check-3conn", action="store_true")
    p.add_argument("--check-suitable", action="store_true")
    p.set_defaults(func=cmd_family_build)

    p = sub.add_parser("tree-family", help="unrooted tree family archive")
    common(p)
    p.add_argument("--s", type=int, required=True)
    p.set_defaults(func=cmd_tree_family)

    p = sub.add_parser("verify-suitable", help="certify distances and separators")
    common(p)
    p.add_argument("--family", type=Path, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--c", type=float, default=1.0, help="separator threshold c*eps*t")
    p.set_defaults(func=cmd_verify_suitable)

    p = sub.add_parser("test-run", help="tester on YES/NO instances", epilog=CSV_HELP)
    common(p)
    p.add_argument("--family", type=Path, default=None)
    p.add_argument("--s", type=int, default=4)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--samples", type=int, default=None, help="override the phase-2 sample size")
    p.add_argument("--farness", action="store_true", help="certify YES/NO farness")
    p.add_argument("--farness-multiplier", type=float, default=1.0,
                   help="required certified farness, as a multiple of eps")
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_test_run)

    p = sub.add_parser("distinguish-sweep", help="collision sample complexity", epilog=CSV_HELP)
    common(p)
    p.add_argument("--s", type=int, nargs="*", default=[3, 4, 5])
    p.add_argument("--family", type=Path, action="append", default=None)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--q-max", type=int, default=None)
    p.add_argument("--qfixed", type=int, default=None)
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(func=cmd_distinguish_sweep)

    p = sub.add_parser("decompose-demo", help="separator decomposition with budget report")
    common(p)
    p.add_argument("--graph", choices=["tree", "path", "file"], default="tree")
    p.add_argument("--file", default=None)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--method", choices=["decompose", "treewidth"], default="decompose")
    p.set_defaults(func=cmd_decompose_demo)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConstructionError, FileNotFoundError) as exc:
        print(f"planarprop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
