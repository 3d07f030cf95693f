"""Result rows, confidence intervals and the on-disk output formats."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from scipy.stats import binomtest

from . import __version__

ROW_FIELDS = ("experiment", "s", "family_size", "n", "q", "success_rate", "ci_low", "ci_high", "seed")


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence, method="wilson")
    return (round(float(ci.low), 6), round(float(ci.high), 6))


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    s: int | None
    family_size: int | None
    n: int | None
    q: int | None
    success_rate: float | None
    ci_low: float | None
    ci_high: float | None
    seed: int | None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ROW_FIELDS}


def header(config: dict) -> dict:
    return {"version": __version__, "config": config}


def rows_to_csv(rows, config: dict, fields=ROW_FIELDS) -> str:
    """CSV text with the config, seed and version on a leading comment line."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(header(config), sort_keys=True) + "\n")
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        d = r.as_dict() if hasattr(r, "as_dict") else dict(r)
        w.writerow({k: _fmt(d.get(k)) for k in fields})
    return buf.getvalue()


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return x


def write_json(path, payload: dict, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(header(config), **payload)
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_default) + "\n")
    return path


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
