"""Suitable families, their certification, and the YES/NO hard instances."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import ConstructionError, UsageError, check_fraction, check_positive_int, check_rng
from .canon import canonical_form
from .edit_distance import DEFAULT_BUDGET, connected_lower_bound
from .graph import Graph, disjoint_union, pad_isolated, random_relabel
from .grids import (GridParams, build_diagonal_graph, make_pool, pairwise_hamming, scoop)
from .partition import min_balanced_separator


@dataclass
class SuitableFamily:
    """Equal-size, pairwise non-isomorphic graphs plus certified metadata.

    ``min_pairwise_hamming`` is measured in ``info["metric"]`` (plain or
    symmetry-reduced code Hamming) for grid families and is None otherwise;
    ``min_pairwise_edits`` is a certified edit lower bound when known.
    """

    members: list[Graph]
    t: int
    epsilon: float
    min_pairwise_hamming: int | None = None
    min_pairwise_edits: int | None = None
    min_separator: int | None = None
    codes: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(g.n != self.t for g in self.members):
            raise ConstructionError("family members must all have t vertices")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def d(self) -> int:
        return max(g.d for g in self.members) if self.members else 1

    def forms(self):
        return [canonical_form(g) for g in self.members]

    def even(self) -> "SuitableFamily":
        """Drop the last member if the size is odd (NO instances need |F| even)."""
        if len(self) % 2 == 0:
            return self
        codes = None if self.codes is None else self.codes[:-1]
        info = dict(self.info, truncated_from=len(self))
        return replace(self, members=self.members[:-1], codes=codes, info=info)


def take_scoops(p: GridParams, radius: int | None = None, *, pool_budget: int = 1 << 20,
                seed=0, symmetry: str = "none", max_members: int | None = None,
                epsilon: float | None = None, dedupe: bool = True) -> SuitableFamily:
    """Greedy pairwise-far subfamily of the diagonal grid family.

    ``symmetry="none"`` uses plain code Hamming distance. ``"dihedral"``
    first reduces the pool to one code per grid-symmetry class and measures
    the smallest Hamming distance over symmetric images, which keeps members
    pairwise non-isomorphic when the gadgets are off. With ``dedupe`` any
    member isomorphic to an earlier one is dropped; small gadgetless grids
    have symmetric codes that plain Hamming distance cannot see.
    """
    radius = p.default_radius() if radius is None else radius
    check_positive_int(radius, "radius")
    pool = make_pool(p, budget=pool_budget, seed=seed, symmetry=symmetry)
    idx = scoop(pool.codes, radius, s=p.s, symmetry=symmetry, max_members=max_members)
    codes = pool.codes[idx]
    greedy_size = len(codes)
    members = [build_diagonal_graph(p, c) for c in codes]
    if dedupe:
        seen, keep = set(), []
        for i, g in enumerate(members):
            form = canonical_form(g)
            if form not in seen:
                seen.add(form)
                keep.append(i)
        codes = codes[keep]
        members = [members[i] for i in keep]
    dist = pairwise_hamming(codes, s=p.s, symmetry=symmetry)
    off = dist[~np.eye(len(codes), dtype=bool)]
    min_h = int(off.min()) if off.size else None
    if min_h is not None and min_h <= radius:
        raise ConstructionError(f"greedy output violates radius: min distance {min_h} <= {radius}")
    info = {
        "kind": "grid", "s": p.s, "L": p.n_cells, "gadgets": p.gadgets, "radius": radius,
        "pool_mode": pool.mode, "pool_size": int(len(pool.codes)), "pool_budget": pool_budget,
        "seed": seed if isinstance(seed, (int, type(None))) else str(seed),
        "symmetry": symmetry, "metric": "orbit_hamming" if symmetry == "dihedral" else "hamming",
        "max_members": max_members, "greedy_size": greedy_size,
        "isomorphic_dropped": greedy_size - len(members),
    }
    eps = 1.0 / p.s if epsilon is None else check_fraction(epsilon, "epsilon")
    return SuitableFamily(members, p.n_vertices, eps, min_pairwise_hamming=min_h,
                          codes=codes, info=info)


# -- certification -------------------------------------------------------------

@dataclass
class SuitabilityReport:
    pair_edits: dict[tuple[int, int], int]
    pair_exact: dict[tuple[int, int], bool]
    min_normalized_distance: float | None
    distance_applicable: bool
    distance_ok: bool
    separators: list[int]
    separators_exact: list[bool]
    separators_extreme: list[int]
    separator_threshold: float
    separator_ok: bool
    forms_distinct: bool

    @property
    def ok(self) -> bool:
        return self.forms_distinct and self.distance_ok and self.separator_ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "forms_distinct": self.forms_distinct,
            "min_normalized_distance": self.min_normalized_distance,
            "distance_applicable": self.distance_applicable,
            "distance_ok": self.distance_ok,
            "pair_edits": [[i, j, e, self.pair_exact[i, j]]
                           for (i, j), e in sorted(self.pair_edits.items())],
            "separators": self.separators,
            "separators_exact": self.separators_exact,
            "separators_extreme": self.separators_extreme,
            "separator_threshold": self.separator_threshold,
            "separator_ok": self.separator_ok,
        }


def check_suitable(f: SuitableFamily, eps: float, d: int, *, separator_c: float = 1.0,
                   min_distance: float = 0.02, edit_budget: int = DEFAULT_BUDGET,
                   separator_budget: int = 2_000_000) -> SuitabilityReport:
    """Certify pairwise farness and separator size of every member.

    Pairwise distances are certified lower bounds on edits normalized by d*t;
    the distance requirement only applies when t > 2/eps. Separators are
    exact minimum sizes for the (1/3, 2/3) two-sided balance and for the
    (0.01/d, 1 - 0.01/d) balance. Failures are reported, never raised.
    """
    eps = check_fraction(eps, "eps")
    forms = f.forms()
    distinct = len(set(forms)) == len(forms)
    pair_edits, pair_exact = {}, {}
    for i, j in combinations(range(len(f)), 2):
        if forms[i] == forms[j]:
            pair_edits[i, j], pair_exact[i, j] = 0, True
            continue
        lb, exact = connected_lower_bound(f.members[i], f.members[j], edit_budget) \
            if _connected(f.members[i]) and _connected(f.members[j]) else (1, False)
        pair_edits[i, j], pair_exact[i, j] = lb, exact
    scale = d * f.t
    min_norm = min(pair_edits.values()) / scale if pair_edits else None
    applicable = f.t > 2 / eps
    dist_ok = (not applicable) or (min_norm is not None and min_norm >= min_distance)
    seps, seps_exact, extreme = [], [], []
    for g in f.members:
        r = min_balanced_separator(g, 2 / 3, budget=separator_budget)
        seps.append(len(r.vertices))
        seps_exact.append(r.exact)
        extreme.append(len(min_balanced_separator(g, 1 - 0.01 / d,
                                                  budget=separator_budget).vertices))
    threshold = separator_c * eps * f.t
    sep_ok = all(s >= threshold and e for s, e in zip(seps, seps_exact))
    return SuitabilityReport(pair_edits, pair_exact, min_norm, applicable, dist_ok, seps,
                             seps_exact, extreme, threshold, sep_ok, distinct)


def _connected(g: Graph) -> bool:
    return g.component_labels()[0] == 1


# -- YES / NO instances --------------------------------------------------------

@dataclass(frozen=True)
class HardInstancePair:
    yes_graph: Graph
    no_graph: Graph
    half_set: tuple[int, ...]
    seed: int | None


def build_yes_instance(f: SuitableFamily, m: int, seed=None, *, n_total: int | None = None) -> Graph:
    """Every member m times, padded with isolated vertices to ``n_total``, relabeled."""
    check_positive_int(m, "copies")
    if not len(f):
        raise UsageError("empty family")
    g = disjoint_union([(h, m) for h in f.members])
    if n_total is not None:
        if n_total < g.n:
            raise UsageError(f"n_total={n_total} is below the union size {g.n}")
        g = pad_isolated(g, n_total - g.n)
    return random_relabel(g, seed)


def build_no_instance(f: SuitableFamily, m: int, seed=None) -> HardInstancePair:
    """Uniform half index set R, 2m copies of each R-member, relabeled.

    The paired YES graph uses the same total size and an independent labeling.
    """
    check_positive_int(m, "copies")
    if len(f) == 0 or len(f) % 2:
        raise ConstructionError(f"NO instances need an even, nonempty family, got |F|={len(f)}")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_r, s_no, s_yes = ss.spawn(3)
    rng = check_rng(s_r)
    half = tuple(sorted(int(x) for x in rng.choice(len(f), len(f) // 2, replace=False)))
    no = random_relabel(disjoint_union([(f.members[i], 2 * m) for i in half]), s_no)
    yes = build_yes_instance(f, m, s_yes)
    plain_seed = seed if isinstance(seed, int) else None
    return HardInstancePair(yes, no, half, plain_seed)


# -- archives ------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def save_family(f: SuitableFamily, path, *, report: SuitabilityReport | None = None,
                extra: dict | None = None) -> Path:
    """Write ``manifest.json`` plus one graph file per member into ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    files = []
    for i, g in enumerate(f.members):
        name = f"member_{i:05d}.txt"
        (path / name).write_text(g.to_text())
        files.append(name)
    manifest = {
        "version": __version__,
        "t": f.t,
        "epsilon": f.epsilon,
        "size": len(f),
        "min_pairwise_hamming": f.min_pairwise_hamming,
        "min_pairwise_edits": f.min_pairwise_edits,
        "min_separator": f.min_separator,
        "info": f.info,
        "codes": None if f.codes is None else ["".join(map(str, c)) for c in f.codes.tolist()],
        "forms": [x.hex() for x in f.forms()],
        "members": files,
        "certification": None if report is None else report.to_dict(),
    }
    if extra:
        manifest.update(extra)
    (path / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return path


def load_family(path) -> SuitableFamily:
    path = Path(path)
    mf = path / "manifest.json"
    if not mf.exists():
        raise UsageError(f"no family manifest at {mf}")
    manifest = json.loads(mf.read_text())
    members = [Graph.from_text((path / name).read_text()) for name in manifest["members"]]
    codes = None
    if manifest.get("codes"):
        codes = np.array([[int(c) for c in row] for row in manifest["codes"]], dtype=np.uint8)
    return SuitableFamily(members, manifest["t"], manifest["epsilon"],
                          min_pairwise_hamming=manifest.get("min_pairwise_hamming"),
                          min_pairwise_edits=manifest.get("min_pairwise_edits"),
                          min_separator=manifest.get("min_separator"),
                          codes=codes, info=manifest.get("info", {}))


def save_pair(pair: HardInstancePair, path, *, extra: dict | None = None) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / "yes.txt").write_text(pair.yes_graph.to_text())
    (path / "no.txt").write_text(pair.no_graph.to_text())
    meta = {"version": __version__, "half_set": list(pair.half_set), "seed": pair.seed}
    if extra:
        meta.update(extra)
    (path / "meta.json").write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return path


def load_pair(path) -> HardInstancePair:
    path = Path(path)
    meta = json.loads((path / "meta.json").read_text())
    return HardInstancePair(Graph.from_text((path / "yes.txt").read_text()),
                            Graph.from_text((path / "no.txt").read_text()),
                            tuple(meta["half_set"]), meta.get("seed"))
