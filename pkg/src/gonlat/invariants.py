"""Gonality invariants of polarized classes on the Enriques lattice and its K3 double.

phi(C)    min |F.C| over nonzero isotropic F
mu(C)     min B.C - 2 over positive-side B with B^2 = 4, B != C
gengon    min(2 phi, mu, floor(C^2/4) + 2)
K3 side   the pullback of C has gonality 2 phi(C), cut out by the pulled-back
          elliptic class; its Clifford index is two less.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace
from typing import Iterable

import numpy as np

from .enumeration import FiberQuery, fiber_classes, min_fiber
from .errors import CapBelowHodgeFloor, NoIsotropicSeed, WrongLattice
from .lattice import (
    LatticeVector,
    PolarizedClass,
    is_two_divisible,
    preset,
    pullback,
)

MU_MODES = ("kl1_full", "paper_literal")


class Achiever(str, enum.Enum):
    TWO_PHI = "TwoPhi"
    MU = "Mu"
    QUARTER = "Quarter"


class Cone(str, enum.Enum):
    POSITIVE_SIDE = "PositiveSide"
    NEGATIVE_SIDE = "NegativeSide"
    ORTHOGONAL = "Orthogonal"


@dataclass(frozen=True)
class MuValue:
    """mu(C), or 'unbounded above the cap' when value is None."""

    value: int | None
    cap: int
    witness: LatticeVector | None = None

    @property
    def bounded(self) -> bool:
        return self.value is not None

    def to_json(self):
        return self.value if self.value is not None else {"unbounded_above": self.cap}


@dataclass(frozen=True)
class CliffordDivisor:
    value: int
    witness: LatticeVector
    square: int
    positive_square_ties: tuple[LatticeVector, ...] = ()


@dataclass
class InvariantReport:
    coords: tuple[int, ...]
    self_int: int
    phi: int
    phi_witness: tuple[int, ...]
    mu: int | None
    mu_cap: int
    mu_witness: tuple[int, ...] | None
    mu_mode: str
    quarter_term: int
    gengon: int
    achiever: list[str]
    genus: int
    max_gonality: int
    k3_self_int: int | None = None
    k3_genus: int | None = None
    k3_gonality: int | None = None
    k3_max_gonality: int | None = None
    k3_clifford: int | None = None
    k3_witness: tuple[int, ...] | None = None
    dm_value: int | None = None
    dm_witness: tuple[int, ...] | None = None
    dm_square: int | None = None
    dm_positive_ties: int | None = None

    def to_json(self) -> dict:
        d = {}
        for k, v in asdict(self).items():
            if isinstance(v, tuple):
                v = list(v)
            d[k] = v
        d["mu"] = self.mu if self.mu is not None else {"unbounded_above": self.mu_cap}
        return d

    @classmethod
    def from_json(cls, data: dict) -> "InvariantReport":
        d = dict(data)
        if isinstance(d.get("mu"), dict):
            d["mu_cap"] = d["mu"]["unbounded_above"]
            d["mu"] = None
        for k, v in d.items():
            if isinstance(v, list) and k != "achiever":
                d[k] = tuple(v)
        return cls(**d)


def hodge_floor(a2: int, b2: int) -> int:
    """Smallest t >= 0 with t^2 >= a2 * b2."""
    p = a2 * b2
    r = math.isqrt(p)
    return r if r * r == p else r + 1


def cone_position(x: LatticeVector, C: PolarizedClass) -> Cone:
    v = x.dot(C.ample_ref)
    if v > 0:
        return Cone.POSITIVE_SIDE
    if v < 0:
        return Cone.NEGATIVE_SIDE
    return Cone.ORTHOGONAL


def is_big_and_nef(x: LatticeVector, C: PolarizedClass) -> bool:
    return x.norm > 0 and x.dot(C.ample_ref) > 0


def seed_bound(C: PolarizedClass, seeds: Iterable[LatticeVector] | None = None) -> int:
    seeds = list(C.lattice.isotropic_seeds if seeds is None else seeds)
    vals = [abs(s.dot(C.vector)) for s in seeds if s.norm == 0 and not s.is_zero()]
    vals = [v for v in vals if v > 0]
    if not vals:
        raise NoIsotropicSeed("no isotropic seed with nonzero pairing; pass seeds explicitly")
    return min(vals)


def phi(C: PolarizedClass, seeds: Iterable[LatticeVector] | None = None
        ) -> tuple[int, LatticeVector]:
    """Minimal |F.C| over isotropic F, with the lexicographically first primitive witness."""
    bound = seed_bound(C, seeds)
    found = min_fiber(C, 0, (1, bound), primitive_only=True, positive_side=True)
    if found is None:  # pragma: no cover - the seed itself lies in the searched range
        raise NoIsotropicSeed("seed bound did not produce an isotropic class")
    t, res = found
    return t, res.vectors[0]


def mu(C: PolarizedClass, mode: str = "kl1_full", cap: int | None = None) -> MuValue:
    """Minimal B.C - 2 over B > 0 with B^2 = 4, B != C, searched up to B.C = cap + 2.

    In kl1_full mode B must also satisfy phi(B) = 2.
    """
    if mode not in MU_MODES:
        raise ValueError(f"unknown mu mode {mode!r}")
    t0 = hodge_floor(4, C.self_int)
    if cap is None:
        cap = t0 - 2
    if cap < t0 - 2:
        raise CapBelowHodgeFloor(f"cap {cap} is below the Hodge floor {t0 - 2}")
    for t in range(max(t0, 1), cap + 3):
        res = fiber_classes(FiberQuery(C, t, 4, positive_side=True))
        cands = [B for B in res.vectors if B != C.vector]
        if mode == "kl1_full":
            cands = _drop_seed_phi_one(cands)
        for B in cands:
            if mode == "kl1_full" and phi(PolarizedClass(B, C.ample_ref))[0] != 2:
                continue
            return MuValue(t - 2, cap, B)
    return MuValue(None, cap)


def _drop_seed_phi_one(cands: list[LatticeVector]) -> list[LatticeVector]:
    """Discard classes that pair to +-1 with an isotropic seed (so phi = 1)."""
    if not cands:
        return cands
    L = cands[0].lattice
    seeds = L.isotropic_seeds
    if not seeds:
        return cands
    S = np.array([L.row(s.coords) for s in seeds], dtype=object)
    X = np.array([B.coords for B in cands], dtype=object)
    hit = (np.abs(X @ S.T) == 1).any(axis=1)
    return [B for B, h in zip(cands, hit) if not h]


def gengon_report(C: PolarizedClass, mu_mode: str = "kl1_full",
                  seeds: Iterable[LatticeVector] | None = None) -> InvariantReport:
    c2 = C.self_int
    ph, ph_w = phi(C, seeds)
    quarter = c2 // 4 + 2
    # mu above min(2 phi, quarter) cannot achieve the minimum
    cap = max(min(2 * ph, quarter) + 2, hodge_floor(4, c2) - 2)
    m = mu(C, mu_mode, cap)
    terms = {Achiever.TWO_PHI: 2 * ph, Achiever.QUARTER: quarter}
    if m.bounded:
        terms[Achiever.MU] = m.value
    gengon = min(terms.values())
    achiever = [a.value for a in (Achiever.TWO_PHI, Achiever.MU, Achiever.QUARTER)
                if terms.get(a) == gengon]
    genus = c2 // 2 + 1
    return InvariantReport(
        coords=C.coords, self_int=c2,
        phi=ph, phi_witness=ph_w.coords,
        mu=m.value, mu_cap=m.cap,
        mu_witness=m.witness.coords if m.witness is not None else None,
        mu_mode=mu_mode, quarter_term=quarter, gengon=gengon, achiever=achiever,
        genus=genus, max_gonality=(genus + 3) // 2,
    )


def dm_min(C: PolarizedClass, cliff_cap: int) -> CliffordDivisor | None:
    """Minimize M.L - M^2 - 2 over M in the doubled lattice, L the pullback of C.

    M ranges over positive-side classes with M^2 >= 0, 2 M^2 <= M.L and value
    at most cliff_cap. Ties prefer the smallest M^2, then lexicographic order.
    """
    if cliff_cap < 0:
        raise ValueError("cliff_cap must be nonnegative")
    L = pullback(C.vector)
    P = PolarizedClass(L, pullback(C.ample_ref))
    l2 = P.self_int
    step = 4 if is_two_divisible(L.lattice) else (2 if L.lattice.is_even else 1)
    best: list[tuple[int, int, LatticeVector]] = []
    for s in range(0, cliff_cap + 3, step):
        t_lo = max(hodge_floor(s, l2), 2 * s, 1)
        t_hi = s + cliff_cap + 2
        if t_lo > t_hi:
            continue
        found = min_fiber(P, s, (t_lo, t_hi), positive_side=True)
        if found is None:
            continue
        t, res = found
        keep = [M for M in res.vectors if 2 * s < t or 2 * M == L]
        if not keep:
            # equality 2 M^2 = M.L only for L = 2M; look further up
            found = min_fiber(P, s, (t + 1, t_hi), positive_side=True) if t < t_hi else None
            if found is None:
                continue
            t, res = found
            keep = list(res.vectors)
        best.extend((t - s - 2, s, M) for M in keep)
    if not best:
        return None
    value = min(b[0] for b in best)
    winners = sorted((s, M.coords, M) for v, s, M in best if v == value)
    s, _, M = winners[0]
    ties = tuple(W for sw, _, W in winners if sw > 0)
    return CliffordDivisor(value, M, s, ties)


def k3_report(C: PolarizedClass, mu_mode: str = "kl1_full",
              base: InvariantReport | None = None, with_dm: bool = True) -> InvariantReport:
    """Fill the K3-side fields: genus, gonality 2 phi, Clifford index, witnesses."""
    if C.lattice != preset("enriques_num"):
        raise WrongLattice("k3_report needs a class on the enriques_num lattice")
    rep = base if base is not None else gengon_report(C, mu_mode)
    k3_genus = C.self_int + 1
    k3_gon = 2 * rep.phi
    E = pullback(C.lattice.vector(rep.phi_witness))
    assert E.dot(pullback(C.vector)) == k3_gon
    assert k3_gon % 2 == 0
    rep = replace(rep, k3_self_int=2 * C.self_int, k3_genus=k3_genus, k3_gonality=k3_gon,
                  k3_max_gonality=(k3_genus + 3) // 2, k3_clifford=k3_gon - 2,
                  k3_witness=E.coords)
    if with_dm:
        dm = dm_min(C, k3_gon - 2)
        rep.dm_value = dm.value
        rep.dm_witness = dm.witness.coords
        rep.dm_square = dm.square
        rep.dm_positive_ties = len(dm.positive_square_ties)
    return rep


def full_report(C: PolarizedClass, mu_mode: str = "kl1_full", with_dm: bool = True
                ) -> InvariantReport:
    rep = gengon_report(C, mu_mode)
    if C.lattice == preset("enriques_num"):
        rep = k3_report(C, mu_mode, base=rep, with_dm=with_dm)
    return rep
