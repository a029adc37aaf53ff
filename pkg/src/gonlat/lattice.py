"""Integral lattices, lattice vectors and polarized classes.

All arithmetic is exact: Gram entries are Python ints and the signature is
obtained by a symmetric rational reduction, never from floating-point
eigenvalues.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    ConfigError,
    Degenerate,
    DimensionMismatch,
    LatticePairMismatch,
    NonPositivePolarization,
    NonSymmetric,
    UnknownPreset,
    ZeroScale,
    ZeroVector,
)

Gram = tuple[tuple[int, ...], ...]

# Bourbaki numbering, 1-based.
E8_EDGES = ((1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4))

PRESETS = ("U", "E8_minus", "enriques_num", "k3_invariant")


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def symmetric_pivots(matrix: Sequence[Sequence[int]]) -> list[Fraction]:
    """Diagonal of a congruence-diagonalization of a symmetric matrix over Q.

    Zero diagonal entries are handled by the substitution x_i -> x_i + x_j,
    which turns a nonzero off-diagonal a_ij into the pivot 2 a_ij + a_jj.
    The result has one zero pivot per dimension of the radical.
    """
    a = [[Fraction(x) for x in row] for row in matrix]
    n = len(a)
    pivots: list[Fraction] = []
    active = list(range(n))
    while active:
        p = next((i for i in active if a[i][i] != 0), None)
        if p is None:
            pair = next(((i, j) for i in active for j in active
                         if i < j and a[i][j] != 0), None)
            if pair is None:
                pivots.extend(Fraction(0) for _ in active)
                break
            i, j = pair
            # row_i += row_j; col_i += col_j
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            p = i
        d = a[p][p]
        pivots.append(d)
        active.remove(p)
        for i in active:
            f = a[i][p] / d
            if f:
                for k in active:
                    a[i][k] -= f * a[p][k]
        for i in active:
            a[i][p] = a[p][i] = Fraction(0)
    return pivots


@dataclass(frozen=True)
class Lattice:
    gram: Gram
    signature: tuple[int, int] = field(compare=False)
    name: str | None = field(default=None, compare=False)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def determinant(self) -> int:
        return bareiss_det(self.gram)

    @property
    def is_hyperbolic(self) -> bool:
        return self.signature == (1, self.rank - 1)

    @cached_property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    @cached_property
    def inverse_diagonal(self) -> tuple[Fraction, ...]:
        """Diagonal of the inverse Gram matrix (norms of the dual basis)."""
        det = self.determinant
        out = []
        for i in range(self.rank):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(self.gram) if k != i]
            out.append(Fraction(bareiss_det(minor), det))
        return tuple(out)

    @cached_property
    def isotropic_seeds(self) -> tuple["LatticeVector", ...]:
        """Basis vectors of norm zero; presets containing U carry e and f."""
        return tuple(self.basis_vector(i) for i in range(self.rank) if self.gram[i][i] == 0)

    @cached_property
    def default_ample(self) -> "LatticeVector | None":
        """e + f when the first two basis vectors span a copy of U, else None."""
        g = self.gram
        if self.rank >= 2 and g[0][0] == g[1][1] == 0 and g[0][1] > 0:
            if all(g[0][k] == g[1][k] == 0 for k in range(2, self.rank)):
                return self.vector([1, 1] + [0] * (self.rank - 2))
        return None

    @cached_property
    def sparse_rows(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        return tuple(tuple((j, g) for j, g in enumerate(row) if g) for row in self.gram)

    def vector(self, coords: Iterable[int]) -> "LatticeVector":
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.rank:
            raise DimensionMismatch(f"expected {self.rank} coordinates, got {len(coords)}")
        return LatticeVector(coords, self)

    def zero(self) -> "LatticeVector":
        return LatticeVector((0,) * self.rank, self)

    def basis_vector(self, i: int) -> "LatticeVector":
        return LatticeVector(tuple(int(k == i) for k in range(self.rank)), self)

    def row(self, coords: Sequence[int]) -> tuple[int, ...]:
        """Gram-matrix product G x (the linear form y -> x.y)."""
        return tuple(sum(g * coords[j] for j, g in r) for r in self.sparse_rows)

    def __repr__(self) -> str:
        label = self.name or "Lattice"
        return f"<{label} rank={self.rank} signature={self.signature}>"


@dataclass(frozen=True)
class LatticeVector:
    coords: tuple[int, ...]
    lattice: Lattice = field(repr=False)

    def _check(self, other: "LatticeVector") -> None:
        if self.lattice != other.lattice:
            raise DimensionMismatch("vectors belong to different lattices")

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        self._check(other)
        return LatticeVector(tuple(a + b for a, b in zip(self.coords, other.coords)), self.lattice)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        self._check(other)
        return LatticeVector(tuple(a - b for a, b in zip(self.coords, other.coords)), self.lattice)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(tuple(-a for a in self.coords), self.lattice)

    def __rmul__(self, k: int) -> "LatticeVector":
        return LatticeVector(tuple(k * a for a in self.coords), self.lattice)

    def __lt__(self, other: "LatticeVector") -> bool:
        return self.coords < other.coords

    def dot(self, other: "LatticeVector") -> int:
        return inner(self.lattice, self, other)

    @property
    def norm(self) -> int:
        return inner(self.lattice, self, self)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def tolist(self) -> list[int]:
        return list(self.coords)


@dataclass(frozen=True)
class PolarizedClass:
    """A class C with C^2 > 0 together with a reference ample class h."""

    vector: LatticeVector
    ample_ref: LatticeVector
    self_int: int = field(init=False, compare=False)

    def __post_init__(self):
        C, h = self.vector, self.ample_ref
        if C.lattice != h.lattice:
            raise DimensionMismatch("class and ample reference live in different lattices")
        c2 = C.norm
        object.__setattr__(self, "self_int", c2)
        if c2 <= 0:
            raise NonPositivePolarization(f"C^2 = {c2} must be positive")
        if h.norm <= 0:
            raise NonPositivePolarization(f"h^2 = {h.norm} must be positive")
        if C.dot(h) <= 0:
            raise NonPositivePolarization(f"C.h = {C.dot(h)} must be positive")

    @property
    def lattice(self) -> Lattice:
        return self.vector.lattice

    @property
    def coords(self) -> tuple[int, ...]:
        return self.vector.coords


def polarize(lattice: Lattice, coords: Iterable[int],
             ample: Iterable[int] | None = None) -> PolarizedClass:
    """Build a PolarizedClass, defaulting h to e + f (or to C itself)."""
    C = lattice.vector(coords)
    if ample is not None:
        h = lattice.vector(ample)
    else:
        h = lattice.default_ample if lattice.default_ample is not None else C
    return PolarizedClass(C, h)


def make_lattice(gram: Sequence[Sequence[int]], name: str | None = None) -> Lattice:
    rows = tuple(tuple(int(x) for x in row) for row in gram)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise NonSymmetric("Gram matrix must be square and nonempty")
    if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(i)):
        raise NonSymmetric("Gram matrix is not symmetric")
    pivots = symmetric_pivots(rows)
    if any(p == 0 for p in pivots):
        raise Degenerate("Gram matrix is degenerate")
    pos = sum(1 for p in pivots if p > 0)
    return Lattice(rows, (pos, n - pos), name)


def inner(L: Lattice, x: LatticeVector, y: LatticeVector) -> int:
    if len(x.coords) != L.rank or len(y.coords) != L.rank:
        raise DimensionMismatch(f"vectors must have {L.rank} coordinates")
    yc = y.coords
    total = 0
    for xi, row in zip(x.coords, L.sparse_rows):
        if xi:
            total += xi * sum(g * yc[j] for j, g in row)
    return total


def direct_sum(*lattices: Lattice, name: str | None = None) -> Lattice:
    n = sum(L.rank for L in lattices)
    gram = [[0] * n for _ in range(n)]
    off = 0
    for L in lattices:
        for i in range(L.rank):
            for j in range(L.rank):
                gram[off + i][off + j] = L.gram[i][j]
        off += L.rank
    sig = (sum(L.signature[0] for L in lattices), sum(L.signature[1] for L in lattices))
    return Lattice(tuple(map(tuple, gram)), sig,
                   name or "+".join(L.name or "?" for L in lattices))


def rescale(L: Lattice, n: int) -> Lattice:
    if n == 0:
        raise ZeroScale("scale factor must be nonzero")
    sig = L.signature if n > 0 else L.signature[::-1]
    gram = tuple(tuple(n * x for x in row) for row in L.gram)
    return Lattice(gram, sig, f"{L.name}({n})" if L.name else None)


def _e8_minus() -> Lattice:
    gram = [[-2 if i == j else 0 for j in range(8)] for i in range(8)]
    for a, b in E8_EDGES:
        gram[a - 1][b - 1] = gram[b - 1][a - 1] = 1
    return make_lattice(gram, "E8_minus")


@lru_cache(maxsize=None)
def preset(name: str) -> Lattice:
    if name == "U":
        return make_lattice([[0, 1], [1, 0]], "U")
    if name == "E8_minus":
        return _e8_minus()
    if name == "enriques_num":
        return direct_sum(preset("U"), _e8_minus(), name="enriques_num")
    if name == "k3_invariant":
        return Lattice(rescale(preset("enriques_num"), 2).gram, (1, 9), "k3_invariant")
    raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def primitivity(x: LatticeVector) -> tuple[int, int]:
    """(content, divisibility) of a nonzero vector."""
    if x.is_zero():
        raise ZeroVector("primitivity of the zero vector is undefined")
    content = math.gcd(*x.coords)
    divisibility = math.gcd(*x.lattice.row(x.coords))
    return content, divisibility


def is_two_divisible(L: Lattice) -> bool:
    """True iff every vector has norm divisible by 4."""
    g = L.gram
    n = L.rank
    return (all(g[i][i] % 4 == 0 for i in range(n))
            and all(g[i][j] % 2 == 0 for i in range(n) for j in range(n) if i != j))


def halve(L: Lattice) -> Lattice:
    if any(x % 2 for row in L.gram for x in row):
        raise LatticePairMismatch("lattice is not a rescaled double")
    base = Lattice(tuple(tuple(x // 2 for x in row) for row in L.gram), L.signature)
    enr = preset("enriques_num")
    return enr if base == enr else base


def pullback(y: LatticeVector, target: Lattice | None = None) -> LatticeVector:
    """Coordinate-identity map into the doubled lattice; norms double."""
    doubled = rescale(y.lattice, 2)
    if y.lattice == preset("enriques_num"):
        doubled = preset("k3_invariant")
    if target is not None:
        if target != doubled:
            raise LatticePairMismatch("target is not the double of the source lattice")
        doubled = target
    return LatticeVector(y.coords, doubled)


def pushforward(x: LatticeVector, target: Lattice | None = None) -> LatticeVector:
    """Multiplication by 2 into the halved lattice, so push(pull(y)) = 2y."""
    base = halve(x.lattice)
    if target is not None:
        if rescale(target, 2) != x.lattice:
            raise LatticePairMismatch("source is not the double of the target lattice")
        base = target
    return LatticeVector(tuple(2 * c for c in x.coords), base)


def lattice_from_config(cfg: dict | str) -> Lattice:
    """Build a lattice from a config mapping (preset / gram / sum, optional scale)."""
    if isinstance(cfg, str):
        return preset(cfg)
    if not isinstance(cfg, dict):
        raise ConfigError(f"lattice spec must be an object or preset name, got {cfg!r}")
    if "preset" in cfg:
        L = preset(cfg["preset"])
    elif "gram" in cfg:
        L = make_lattice(cfg["gram"], cfg.get("name"))
    elif "sum" in cfg:
        parts = cfg["sum"]
        if not parts:
            raise ConfigError("'sum' needs at least one summand")
        L = direct_sum(*(lattice_from_config(p) for p in parts), name=cfg.get("name"))
    else:
        raise ConfigError("lattice config needs one of 'preset', 'gram', 'sum'")
    if "scale" in cfg:
        L = rescale(L, int(cfg["scale"]))
    return L


def load_lattice(spec: str) -> Lattice:
    """Resolve a preset name or a path to a JSON lattice config."""
    if spec in PRESETS:
        return preset(spec)
    path = Path(spec)
    if not path.exists():
        raise UnknownPreset(f"{spec!r} is neither a preset nor a config file")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{spec}: invalid JSON ({exc})") from None
    return lattice_from_config(cfg)
