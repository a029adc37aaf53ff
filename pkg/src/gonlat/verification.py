"""Seeded sampling of polarized classes, property suite and survey tables."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .enumeration import box_oracle, certified_box, BOX_LIMIT
from .errors import ConfigError, EmptySampleSpace
from .invariants import InvariantReport, full_report
from .lattice import (
    Lattice,
    LatticeVector,
    PolarizedClass,
    is_two_divisible,
    preset,
    pullback,
    pushforward,
    rescale,
)

GENERATOR = "numpy.random.PCG64"
EXHAUSTIVE_BOX_LIMIT = 1_000_000

SURVEY_COLUMNS = (
    "coords", "self_int", "genus", "phi", "mu", "mu_cap", "mu_mode", "quarter_term",
    "gengon", "achiever", "k3_self_int", "k3_genus", "k3_gonality", "k3_max_gonality",
    "k3_clifford", "phi_witness", "mu_witness",
)


@dataclass
class SuiteConfig:
    lattice: Lattice = field(default_factory=lambda: preset("enriques_num"))
    ample_ref: tuple[int, ...] | None = None
    sample_count: int = 500
    norm_cap: int = 60
    box: int | tuple[int, ...] = (8, 8, 1, 1, 1, 1, 1, 1, 1, 1)
    rng_seed: int = 0
    mu_mode: str = "kl1_full"
    dm_norm_cap: int | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.norm_cap < 2:
            raise ConfigError("norm_cap must be at least 2")
        if self.sample_count < 1:
            raise ConfigError("sample_count must be at least 1")
        r = self.lattice.rank
        if isinstance(self.box, int):
            self.box = (self.box,) * r
        self.box = tuple(int(b) for b in self.box)
        if len(self.box) != r or any(b < 0 for b in self.box):
            raise ConfigError(f"box needs {r} nonnegative bounds")
        if self.ample_ref is None:
            h = self.lattice.default_ample
            if h is None:
                raise ConfigError("lattice has no default ample class; pass ample_ref")
            self.ample_ref = h.coords
        self.ample_ref = tuple(int(x) for x in self.ample_ref)

    @property
    def ample(self) -> LatticeVector:
        return self.lattice.vector(self.ample_ref)

    def describe(self) -> dict:
        return {
            "lattice": self.lattice.name or [list(r) for r in self.lattice.gram],
            "ample_ref": list(self.ample_ref), "sample_count": self.sample_count,
            "norm_cap": self.norm_cap, "box": list(self.box), "rng_seed": self.rng_seed,
            "mu_mode": self.mu_mode, "dm_norm_cap": self.dm_norm_cap,
        }


@dataclass
class Violation:
    prop: str
    coords: tuple[int, ...]
    seed: int
    report: dict
    oracle: str

    def to_json(self) -> dict:
        return {"property": self.prop, "coords": list(self.coords), "seed": self.seed,
                "oracle": self.oracle, "report": self.report}


@dataclass
class SuiteReport:
    config: dict
    classes: int
    counts: dict[str, dict[str, int]]
    violations: list[Violation]
    elapsed: float
    generator: str = GENERATOR

    @property
    def failed(self) -> int:
        return sum(c["fail"] for c in self.counts.values())

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def to_json(self, with_elapsed: bool = True) -> dict:
        d = {"generator": self.generator, "config": self.config, "classes": self.classes,
             "counts": self.counts, "violations": [v.to_json() for v in self.violations]}
        if with_elapsed:
            d["elapsed"] = self.elapsed
        return d


# ---------------------------------------------------------------------------
# sampling

def _normalize(v: Sequence[int], lattice: Lattice, h: LatticeVector, norm_cap: int):
    if not any(v):
        return None
    g = math.gcd(*v)
    v = tuple(int(x) // g for x in v)
    C = LatticeVector(v, lattice)
    c2 = C.norm
    if c2 <= 0 or c2 > norm_cap or C.dot(h) <= 0:
        return None
    return v


def sample_classes(cfg: SuiteConfig) -> list[PolarizedClass]:
    """Deterministic primitive classes with 0 < C^2 <= norm_cap and C.h > 0."""
    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
    L, h, box = cfg.lattice, cfg.ample, cfg.box
    size = math.prod(2 * b + 1 for b in box)
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[int, ...]] = []

    def take(v):
        v = _normalize(v, L, h, cfg.norm_cap)
        if v is not None and v not in seen:
            seen.add(v)
            out.append(v)

    if size <= EXHAUSTIVE_BOX_LIMIT:
        axes = [np.arange(-b, b + 1) for b in box]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, L.rank)
        for idx in rng.permutation(len(grid)):
            take(grid[idx].tolist())
            if len(out) >= cfg.sample_count:
                break
    else:
        lo = -np.array(box)
        hi = np.array(box) + 1
        draws = 0
        max_draws = 2000 * cfg.sample_count + 100_000
        while len(out) < cfg.sample_count and draws < max_draws:
            batch = rng.integers(lo, hi, size=(4096, L.rank))
            draws += len(batch)
            for v in batch.tolist():
                take(v)
                if len(out) >= cfg.sample_count:
                    break
    if not out:
        raise EmptySampleSpace("no class in the box satisfies the sampling filters")
    return [PolarizedClass(L.vector(v), h) for v in out]


# ---------------------------------------------------------------------------
# properties

def _trichotomy_ok(r: InvariantReport) -> bool:
    if r.gengon >= 2 * r.phi:
        return True
    return r.self_int >= 10 or (r.self_int, r.phi) in {(6, 2), (4, 2)}


def _mu_hodge_ok(C: PolarizedClass, r: InvariantReport) -> bool:
    if r.mu_witness is None:
        return True
    B = C.lattice.vector(r.mu_witness)
    return B.dot(C.vector) ** 2 >= 4 * C.self_int and B.norm == 4


def _gengon_definition_ok(r: InvariantReport) -> bool:
    terms = [2 * r.phi, r.quarter_term]
    if r.mu is not None:
        terms.append(r.mu)
    elif min(terms) > r.mu_cap:  # capped mu must not be able to win
        return False
    return r.gengon == min(terms) and r.quarter_term == r.self_int // 4 + 2


def class_properties(C: PolarizedClass, r: InvariantReport, dm_norm_cap: int | None
                     ) -> dict[str, bool]:
    """Evaluate every relation on one class; keys are property names."""
    props: dict[str, bool] = {
        "gengon_definition": _gengon_definition_ok(r),
        "phi_bound_eq2": 2 * r.phi <= r.gengon + 2,
        "phi_square": r.phi ** 2 <= r.self_int,
        "mu_hodge": _mu_hodge_ok(C, r),
        "trichotomy": _trichotomy_ok(r),
        "genus": r.genus == r.self_int // 2 + 1 and r.self_int % 2 == 0,
        "gengon_le_max_gonality": r.gengon <= r.max_gonality,
    }
    if r.k3_gonality is not None:
        E = pullback(C.lattice.vector(r.k3_witness))
        Ct = pullback(C.vector)
        props.update({
            "k3_genus": r.k3_genus == 2 * r.genus - 1 and r.k3_self_int == Ct.norm,
            "k3_gonality_eq11": r.k3_gonality == 2 * r.phi == E.dot(Ct) and E.norm == 0,
            "double_cover_eq10": r.gengon <= r.k3_gonality <= 2 * r.gengon,
            "parity": r.k3_gonality % 2 == 0 and r.k3_clifford == r.k3_gonality - 2,
            "max_gonality_clamp": r.k3_gonality <= r.k3_max_gonality == (r.k3_genus + 3) // 2,
            "doubling": Ct.norm == 2 * C.self_int
            and pushforward(Ct).coords == tuple(2 * x for x in C.coords),
        })
        if r.dm_value is not None and (dm_norm_cap is None or r.self_int <= dm_norm_cap):
            props["dm_elliptic"] = r.dm_value == 2 * r.phi - 2 and r.dm_square == 0
            props["clifford_sandwich"] = r.dm_value + 2 <= r.k3_gonality <= r.dm_value + 3
    return props


def _oracle_box(C: PolarizedClass, n: int, t: int):
    """The cheaper of the two certified boxes for F^2 = n, F.C <= t, or None."""
    best = None
    for co in ("pairing", "lattice"):
        box = certified_box(C, n, t, coordinates=co)
        size = math.prod(2 * b + 1 for b in box)
        if size <= BOX_LIMIT and (best is None or size < best[0]):
            best = (size, box, co)
    return best and best[1:]


def oracle_recheck(C: PolarizedClass, r: InvariantReport, prop: str | None = None) -> str:
    """Recompute the invariants behind a failed property by brute force in a certified box.

    Returns "confirmed" when the oracle reproduces the reported values (so the
    violation is genuine), "kernel_mismatch" when it disagrees, and
    "unverifiable" when no certified box fits under the point limit.
    """
    found = _oracle_box(C, 0, r.phi)
    if found is None:
        return "unverifiable"
    box, co = found
    res = box_oracle(C, 0, box, r.phi, primitive_only=True, positive_side=True, coordinates=co)
    if not res or min(res) != r.phi or res[r.phi].vectors[0].coords != r.phi_witness:
        return "kernel_mismatch"
    if r.mu is not None and r.mu_mode == "paper_literal":
        t = r.mu + 2
        found = _oracle_box(C, 4, t)
        if found is None:
            return "unverifiable"
        box, co = found
        res = box_oracle(C, 4, box, t, positive_side=True, coordinates=co)
        hits = [t_ for t_, v in res.items() if any(B != C.vector for B in v.vectors)]
        if not hits or min(hits) != t:
            return "kernel_mismatch"
    if prop in ("dm_elliptic", "clifford_sandwich") and r.dm_witness is not None:
        # the reported divisor must exist exactly as claimed in the double cover
        Lt = pullback(C.vector)
        Pt = PolarizedClass(Lt, pullback(C.ample_ref))
        M = LatticeVector(tuple(r.dm_witness), Lt.lattice)
        t = M.dot(Lt)
        if M.norm != r.dm_square or t - M.norm - 2 != r.dm_value:
            return "kernel_mismatch"
        found = _oracle_box(Pt, M.norm, t)
        if found is None:
            return "unverifiable"
        box, co = found
        res = box_oracle(Pt, M.norm, box, t, positive_side=True, coordinates=co)
        if t not in res or M not in res[t].vectors:
            return "kernel_mismatch"
    return "confirmed"


def _evaluate(args) -> tuple[tuple[int, ...], dict, dict[str, bool]]:
    lattice, coords, ample, mu_mode, dm_norm_cap, dm = args
    C = PolarizedClass(lattice.vector(coords), lattice.vector(ample))
    with_dm = dm and lattice == preset("enriques_num") and (
        dm_norm_cap is None or C.self_int <= dm_norm_cap)
    r = full_report(C, mu_mode, with_dm=with_dm)
    return coords, r.to_json(), class_properties(C, r, dm_norm_cap)


def _workers(cfg_workers: int | None) -> int:
    if cfg_workers is not None:
        return max(1, cfg_workers)
    env = os.environ.get("GONLAT_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"GONLAT_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("GONLAT_THREADS must be at least 1")
    return n


def evaluate_classes(classes: Sequence[PolarizedClass], mu_mode: str,
                     dm_norm_cap: int | None = None, workers: int | None = None,
                     dm: bool = True):
    jobs = [(C.lattice, C.coords, C.ample_ref.coords, mu_mode, dm_norm_cap, dm)
            for C in classes]
    n = _workers(workers)
    if n == 1 or len(jobs) < 2:
        results = [_evaluate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_evaluate, jobs, chunksize=8))
    return sorted(results, key=lambda x: x[0])


def lattice_checks(L: Lattice, rng_seed: int, trials: int = 1000) -> dict[str, bool]:
    """Two-divisibility of the double and the covering identities on random vectors."""
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    D = rescale(L, 2)
    X = rng.integers(-5, 6, size=(trials, L.rank)).tolist()
    Y = rng.integers(-5, 6, size=(trials, L.rank)).tolist()
    norms_ok = all(LatticeVector(tuple(x), D).norm % 4 == 0 for x in X)
    pair_ok = push_ok = True
    for x, y in zip(X, Y):
        a, b = L.vector(x), L.vector(y)
        pa, pb = pullback(a), pullback(b)
        pair_ok &= pa.dot(pb) == 2 * a.dot(b)
        push_ok &= pushforward(pa).coords == tuple(2 * c for c in x)
    return {"two_divisible": is_two_divisible(D) and norms_ok,
            "pullback_doubles_pairing": pair_ok, "push_pull_is_two": push_ok}


def run_suite(cfg: SuiteConfig, progress: Callable[[int], None] | None = None) -> SuiteReport:
    start = time.perf_counter()
    classes = sample_classes(cfg)
    results = evaluate_classes(classes, cfg.mu_mode, cfg.dm_norm_cap, cfg.workers)
    counts: dict[str, dict[str, int]] = {}
    violations: list[Violation] = []
    by_coords = {C.coords: C for C in classes}
    for coords, rep, props in results:
        for name, ok in props.items():
            c = counts.setdefault(name, {"pass": 0, "fail": 0})
            c["pass" if ok else "fail"] += 1
            if not ok:
                C = by_coords[coords]
                status = oracle_recheck(C, InvariantReport.from_json(rep), name)
                violations.append(Violation(name, coords, cfg.rng_seed, rep, status))
    for name, ok in lattice_checks(cfg.lattice, cfg.rng_seed).items():
        counts["lattice_" + name] = {"pass": int(ok), "fail": int(not ok)}
    counts = dict(sorted(counts.items()))
    return SuiteReport(cfg.describe(), len(classes), counts, violations,
                       time.perf_counter() - start)


# ---------------------------------------------------------------------------
# survey

def survey_rows(classes: Iterable[PolarizedClass], mu_mode: str = "kl1_full",
                workers: int | None = None) -> list[dict]:
    results = evaluate_classes(list(classes), mu_mode, workers=workers, dm=False)
    rows = []
    for _, rep, _ in results:
        rows.append({k: rep[k] for k in SURVEY_COLUMNS})
    rows.sort(key=lambda r: (r["self_int"], r["phi"], r["coords"]))
    return rows


def survey(cfg: SuiteConfig) -> list[dict]:
    return survey_rows(sample_classes(cfg), cfg.mu_mode, cfg.workers)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, dict):
        return f"unbounded_above:{v['unbounded_above']}"
    if isinstance(v, list):
        if all(isinstance(x, str) for x in v):
            return "|".join(v)
        return "[" + ",".join(str(x) for x in v) + "]"
    return str(v)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(SURVEY_COLUMNS)
    for r in rows:
        w.writerow([_cell(r[k]) for k in SURVEY_COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: Sequence[dict]) -> str:
    return json.dumps(rows, indent=2)
