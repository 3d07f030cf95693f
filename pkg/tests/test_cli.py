from __future__ import annotations

import json
import subprocess
import sys

import pytest

from planarprop.cli import analytic_q2, growth_checks, main


def run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def files(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_family_build_and_verify(tmp_path):
    code, out = run(tmp_path, "fam", "family-build", "--s", "3", "--radius", "1")
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["certificate"]["ok"] and manifest["certificate"]["size"] == 4
    code, _ = run(tmp_path, "ver", "verify-suitable", "--family", str(out), "--eps", "0.25")
    assert code == 0


def test_family_build_is_deterministic(tmp_path):
    a = run(tmp_path, "a", "family-build", "--s", "4", "--radius", "2", "--symmetry", "none")[1]
    b = run(tmp_path, "b", "family-build", "--s", "4", "--radius", "2", "--symmetry", "none")[1]
    assert files(a) == files(b)


def test_failed_certificate_exits_one(tmp_path):
    # without dedupe the plain greedy keeps isomorphic codes
    code, _ = run(tmp_path, "dup", "family-build", "--s", "4", "--radius", "2",
                  "--symmetry", "none", "--no-dedupe")
    assert code == 1


def test_usage_errors_exit_two(tmp_path, capsys):
    assert run(tmp_path, "x", "family-build", "--s", "3", "--eps", "1.5")[0] == 2
    assert run(tmp_path, "x", "verify-suitable", "--family", str(tmp_path / "missing"))[0] == 2
    assert run(tmp_path, "x", "distinguish-sweep", "--s")[0] == 2
    assert run(tmp_path, "x", "family-build", "--s", "3", "--check-3conn")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["family-build"])
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_tree_family(tmp_path):
    code, out = run(tmp_path, "trees", "tree-family", "--s", "8")
    cert = json.loads((out / "manifest.json").read_text())["certificate"]
    assert code == 0 and cert["unrooted"] == 11 and cert["rooted"] == 46


def test_test_run_is_deterministic(tmp_path):
    args = ["test-run", "--s", "3", "--radius", "1", "--m", "3", "--trials", "4",
            "--samples", "20000", "--seed", "5"]
    a = run(tmp_path, "a", *args)
    b = run(tmp_path, "b", *args)
    assert a[0] == b[0] == 0 and files(a[1]) == files(b[1])
    lines = (a[1] / "test_run.csv").read_text().splitlines()
    assert lines[0].startswith("# ") and json.loads(lines[0][2:])["config"]["seed"] == 5
    assert lines[1] == "experiment,s,family_size,n,q,success_rate,ci_low,ci_high,seed"


def test_jobs_do_not_change_results(tmp_path):
    args = ["test-run", "--s", "3", "--radius", "1", "--m", "2", "--trials", "3",
            "--samples", "5000"]
    a = run(tmp_path, "a", *args)[1]
    b = run(tmp_path, "b", *args, "--jobs", "2")[1]
    assert files(a) == files(b)


def test_sweep_qfixed_matches_analytic(tmp_path):
    code, out = run(tmp_path, "q2", "distinguish-sweep", "--s", "3", "--qfixed", "2",
                    "--trials", "2000")
    row = json.loads((out / "sweep.json").read_text())["qfixed"][0]
    assert code == 0
    assert row["yes_rate"] == pytest.approx(row["analytic_yes"], abs=0.04)
    assert row["no_rate"] == pytest.approx(row["analytic_no"], abs=0.04)


def test_sweep_is_deterministic(tmp_path):
    args = ["distinguish-sweep", "--s", "3", "4", "--trials", "40", "--seed", "2"]
    a, b = run(tmp_path, "a", *args), run(tmp_path, "b", *args)
    assert a[0] == b[0] == 0 and files(a[1]) == files(b[1])


def test_decompose_demo(tmp_path):
    code, out = run(tmp_path, "dec", "decompose-demo", "--n", "2000", "--count", "2")
    rep = json.loads((out / "decompose.json").read_text())
    assert code == 0 and rep["ok"] and len(rep["reports"]) == 2
    assert (out / "partition_tree000.txt").exists()
    code, _ = run(tmp_path, "tw", "decompose-demo", "--graph", "path", "--n", "500",
                  "--method", "treewidth", "--eps", "0.2", "--d", "2")
    assert code == 0


def test_env_var_sets_output(tmp_path, monkeypatch):
    monkeypatch.setenv("PLANARPROP_OUT", str(tmp_path / "env"))
    assert main(["tree-family", "--s", "5"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_help_lists_csv_columns():
    res = subprocess.run([sys.executable, "-m", "planarprop", "test-run", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "success_rate" in res.stdout and "Wilson" in res.stdout


def test_analytic_q2():
    assert analytic_q2(12) == pytest.approx((11 / 12, 1 / 6))
    assert analytic_q2(1) == (1.0, 0.0)


def test_growth_checks():
    class R:
        def __init__(self, size, q):
            self.family_size, self.q_star = size, q
    assert growth_checks([R(4, 4), R(16, 8)])["ratios"] == [1.0]
    assert not growth_checks([R(4, 4), R(16, None)])["increasing"]


def test_farness_multiplier_scales_the_requirement(tmp_path):
    args = ["test-run", "--s", "3", "--radius", "1", "--m", "3", "--trials", "6",
            "--samples", "20000", "--seed", "3", "--farness", "--assert"]
    assert run(tmp_path, "lax", *args, "--farness-multiplier", "0")[0] == 0
    code, out = run(tmp_path, "strict", *args)
    far = json.loads((out / "test_run.json").read_text())["farness"]
    assert code == (0 if far["normalized"] >= 0.25 else 1)
