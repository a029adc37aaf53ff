"""Finite enumeration of classes with fixed square and fixed pairing.

For a polarization C of a hyperbolic lattice, the classes F with F.C = t form
an affine lattice x0 + K where K is the orthogonal complement of C. That
complement is negative definite, so F^2 = n cuts out the integer points on an
ellipsoid of squared radius t^2/C^2 - n. These are enumerated by a
Fincke-Pohst style descent whose interval bounds are computed in exact
rational arithmetic.

``box_oracle`` is an independent brute-force scan used to check the kernel.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BoxTooLarge, EmptyRange, NonPositivePolarization, NotHyperbolic
from .lattice import Lattice, LatticeVector, PolarizedClass

BOX_LIMIT = 10**8


@dataclass(frozen=True)
class FiberQuery:
    polarization: PolarizedClass
    t: int
    n: int
    primitive_only: bool = False
    positive_side: bool = False


@dataclass(frozen=True)
class FiberResult:
    vectors: tuple[LatticeVector, ...]
    exhaustive: bool = True

    def __len__(self) -> int:
        return len(self.vectors)

    def __bool__(self) -> bool:
        return bool(self.vectors)

    @property
    def coords(self) -> list[tuple[int, ...]]:
        return [v.coords for v in self.vectors]


# ---------------------------------------------------------------------------
# exact helpers

def _frac_isqrt_floor(q: Fraction) -> int:
    """floor(sqrt(q)) for q >= 0."""
    # floor(sqrt(a/b)) == isqrt(a*b) // b
    return math.isqrt(q.numerator * q.denominator) // q.denominator


def int_interval(center: Fraction, rad2: Fraction) -> tuple[int, int]:
    """Integers x with (x - center)^2 <= rad2, as an inclusive range (lo > hi if none)."""
    if rad2 < 0:
        return 1, 0
    r = _frac_isqrt_floor(rad2) + 1
    lo = math.floor(center) - r
    hi = math.ceil(center) + r
    while lo <= hi and (lo - center) ** 2 > rad2:
        lo += 1
    while hi >= lo and (hi - center) ** 2 > rad2:
        hi -= 1
    return lo, hi


def _exact_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def hermite_column(c: Sequence[int]) -> tuple[int, list[list[int]]]:
    """Unimodular U (as a list of columns) with c.U = (g, 0, ..., 0), g = gcd(c) > 0."""
    n = len(c)
    vals = list(c)
    cols = [[int(i == j) for i in range(n)] for j in range(n)]
    # bring a nonzero entry to position 0
    k = next(i for i, v in enumerate(vals) if v)
    vals[0], vals[k] = vals[k], vals[0]
    cols[0], cols[k] = cols[k], cols[0]
    for j in range(1, n):
        a, b = vals[0], vals[j]
        if b == 0:
            continue
        g, s, t = _xgcd(a, b)
        c0 = [s * x + t * y for x, y in zip(cols[0], cols[j])]
        cj = [(-b // g) * x + (a // g) * y for x, y in zip(cols[0], cols[j])]
        cols[0], cols[j] = c0, cj
        vals[0], vals[j] = g, 0
    if vals[0] < 0:
        cols[0] = [-x for x in cols[0]]
        vals[0] = -vals[0]
    return vals[0], cols


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def lll_reduce(basis: list[list[int]], form: Sequence[Sequence[int]],
               delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    """LLL-reduce integer vectors with respect to a positive-definite integer form."""
    b = [list(v) for v in basis]
    m = len(b)
    if m <= 1:
        return b

    gram = _neg_gram(b, form)
    gram = [[-x for x in row] for row in gram]

    # Gram-Schmidt data kept up to date incrementally
    mu = [[Fraction(0)] * m for _ in range(m)]
    B = [Fraction(0)] * m
    for i in range(m):
        for j in range(i):
            mu[i][j] = (gram[i][j] - sum(mu[j][k] * mu[i][k] * B[k] for k in range(j))) / B[j]
        B[i] = gram[i][i] - sum(mu[i][k] ** 2 * B[k] for k in range(i))

    def red(k, l):
        q = round(mu[k][l])
        if q:
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            mu[k][l] -= q
            for i in range(l):
                mu[k][i] -= q * mu[l][i]

    k = 1
    while k < m:
        red(k, k - 1)
        if B[k] < (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            b[k], b[k - 1] = b[k - 1], b[k]
            for j in range(k - 1):
                mu[k][j], mu[k - 1][j] = mu[k - 1][j], mu[k][j]
            mk = mu[k][k - 1]
            Bn = B[k] + mk * mk * B[k - 1]
            mu[k][k - 1] = mk * B[k - 1] / Bn
            B[k] = B[k - 1] * B[k] / Bn
            B[k - 1] = Bn
            for i in range(k + 1, m):
                tmp = mu[i][k]
                mu[i][k] = mu[i][k - 1] - mk * tmp
                mu[i][k - 1] = tmp + mu[k][k - 1] * mu[i][k]
            k = max(k - 1, 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b


def _ldl_scaled(A: Sequence[Sequence[int]], rhs: Sequence[int]
                ) -> tuple[int, list[list[int]], list[int], list[int]]:
    """Integer data for A = U^T diag(d) U and y* = A^-1 rhs, A positive definite.

    Returns (D, D*U, D*d, D*y*), all integral, from fraction-free (Bareiss)
    elimination of the augmented matrix [A | rhs]. The pivots are the leading
    minors of A, so D = lcm of the pivots clears every denominator.
    Raises NotHyperbolic if a pivot is not positive.
    """
    m = len(A)
    M = [[int(x) for x in row] + [int(c)] for row, c in zip(A, rhs)]
    piv = [1]
    for i in range(m):
        p = M[i][i]
        if p <= 0:
            raise NotHyperbolic("orthogonal complement of C is not negative definite")
        Mi, prev = M[i], piv[-1]
        for r in range(i + 1, m):
            Mr = M[r]
            a = Mr[i]
            for c in range(i + 1, m + 1):
                Mr[c] = (p * Mr[c] - a * Mi[c]) // prev
        piv.append(p)
    det = piv[-1]
    # back substitution for X = det * y*
    X = [0] * m
    for i in range(m - 1, -1, -1):
        Mi = M[i]
        X[i] = (det * Mi[m] - sum(Mi[j] * X[j] for j in range(i + 1, m))) // Mi[i]
    D = math.lcm(*piv)
    U = [[0] * m for _ in range(m)]
    for i in range(m):
        U[i][i] = D
        for j in range(i + 1, m):
            U[i][j] = D * M[i][j] // piv[i + 1]
    Dq = [D * piv[i + 1] // piv[i] for i in range(m)]
    Y = [D * x // det for x in X]
    g = math.gcd(D, *Dq, *Y, *(x for row in U for x in row))
    return (D // g, [[x // g for x in row] for row in U], [x // g for x in Dq],
            [y // g for y in Y])


# ---------------------------------------------------------------------------
# fiber kernel

def _neg_gram(K: list[list[int]], G) -> list[list[int]]:
    """-K G K^T, through int64 when the entries are small enough."""
    kmax = max((abs(x) for row in K for x in row), default=0)
    gmax = max(abs(x) for row in G for x in row)
    r = len(G)
    if kmax * kmax * gmax * r * r < 2**62:
        Kn = np.array(K, dtype=np.int64)
        return (-(Kn @ np.array(G, dtype=np.int64) @ Kn.T)).tolist()
    GK = [[sum(g * x for g, x in zip(row, k)) for row in G] for k in K]
    return [[-sum(a * b for a, b in zip(ki, gk)) for gk in GK] for ki in K]


class _FiberSolver:
    """Per-polarization precomputation: kernel basis, reduced form, LDL."""

    def __init__(self, lattice: Lattice, coords: tuple[int, ...]):
        G = lattice.gram
        r = lattice.rank
        self.lattice = lattice
        self.C = coords
        self.c2 = sum(ci * cj * G[i][j] for i, ci in enumerate(coords) for j, cj in enumerate(coords))
        self.row = lattice.row(coords)
        self.g, cols = hermite_column(self.row)
        self.x1 = cols[0]
        neg = [[-x for x in row] for row in G]
        K = lll_reduce(cols[1:], neg)
        self.K = K
        m = r - 1
        self.m = m
        # A = -K^T G K, positive definite
        self.A = _neg_gram(K, G)
        gx1 = lattice.row(self.x1)
        b1 = [sum(k * v for k, v in zip(K[i], gx1)) for i in range(m)]
        self.scaled = _ldl_scaled(self.A, b1) if m else (1, [], [], [])

    def solve(self, t: int, n: int) -> list[tuple[int, ...]]:
        """All integer F with F.C = t and F^2 = n, sorted."""
        if t % self.g:
            return []
        R = Fraction(t * t, self.c2) - n
        if R < 0:
            return []
        k = t // self.g
        m, K = self.m, self.K
        x0 = [k * x for x in self.x1]
        if m == 0:
            return [tuple(x0)] if R == 0 else []
        # Scale by D so that D*u_ij, D*d_i, D*ystar_i and D*R are integers;
        # centers are then integers over S = D^2 and remainders over D*S^2.
        D, Uq, Dq, Y1 = self.scaled
        D = D * R.denominator // math.gcd(D, R.denominator)
        s_ = D // self.scaled[0]
        U = [[x * s_ for x in row] for row in Uq]
        Dd = [x * s_ for x in Dq]
        Ys = [k * y * s_ for y in Y1]
        S = D * D
        REM0 = R.numerator * (D // R.denominator) * S * S
        ys: list[tuple[int, ...]] = []
        y = [0] * m
        dz = [0] * m  # D*y_j - D*ystar_j

        def emit():
            ys.append(tuple(y))

        def descend(i: int, rem: int):
            Ui = U[i]
            Ci = D * Ys[i] - sum(Ui[j] * dz[j] for j in range(i + 1, m))
            di = Dd[i]
            if i == 0:
                if rem % di:
                    return
                sq = rem // di
                r = math.isqrt(sq)
                if r * r != sq:
                    return
                for num in {Ci - r, Ci + r}:
                    if num % S == 0:
                        y[0] = num // S
                        emit()
                return
            r = math.isqrt(rem // di)
            lo = -((r - Ci) // S)
            hi = (Ci + r) // S
            for yi in range(lo, hi + 1):
                Yv = yi * S - Ci
                y[i] = yi
                dz[i] = D * yi - Ys[i]
                descend(i - 1, rem - di * Yv * Yv)

        descend(m - 1, REM0)
        out = _combine(x0, K, ys)
        out.sort()
        return out


def _combine(x0: list[int], K: list[list[int]], ys: list[tuple[int, ...]]
             ) -> list[tuple[int, ...]]:
    """x0 + sum_i y_i K_i for every y, in int64 when that cannot overflow."""
    if not ys:
        return []
    ymax = max(max(map(abs, y)) for y in ys)
    kmax = max(max(map(abs, row)) for row in K)
    if ymax * kmax * len(K) + max(map(abs, x0)) < 2**62:
        F = np.array(ys, dtype=np.int64) @ np.array(K, dtype=np.int64)
        F += np.array(x0, dtype=np.int64)
        return [tuple(row) for row in F.tolist()]
    out = []
    for y in ys:
        F = list(x0)
        for yi, Ki in zip(y, K):
            if yi:
                for j, kij in enumerate(Ki):
                    F[j] += yi * kij
        out.append(tuple(F))
    return out


@lru_cache(maxsize=4096)
def _solver(lattice: Lattice, coords: tuple[int, ...]) -> _FiberSolver:
    return _FiberSolver(lattice, coords)


def _check_polarization(P: PolarizedClass) -> None:
    if not P.lattice.is_hyperbolic:
        raise NotHyperbolic(f"signature {P.lattice.signature} is not (1, {P.lattice.rank - 1})")
    if P.self_int <= 0:
        raise NonPositivePolarization("C^2 must be positive")


def _keep(Fs: list[tuple[int, ...]], h_row, primitive_only, positive_side) -> list[bool]:
    keep = [any(F) for F in Fs]
    if positive_side and Fs:
        X = np.array(Fs, dtype=object)
        side = X @ np.array(h_row, dtype=object) > 0
        keep = [k and bool(p) for k, p in zip(keep, side)]
    if primitive_only:
        keep = [k and math.gcd(*F) == 1 for k, F in zip(keep, Fs)]
    return keep


def fiber_classes(q: FiberQuery) -> FiberResult:
    """Exactly the classes F with F.C = t, F^2 = n satisfying the query flags."""
    P = q.polarization
    _check_polarization(P)
    L = P.lattice
    solver = _solver(L, P.coords)
    Fs = solver.solve(q.t, q.n)
    keep = _keep(Fs, L.row(P.ample_ref.coords), q.primitive_only, q.positive_side)
    return FiberResult(tuple(LatticeVector(F, L) for F, k in zip(Fs, keep) if k), True)


def min_fiber(P: PolarizedClass, n: int, t_range: tuple[int, int], *,
              primitive_only: bool = False, positive_side: bool = False,
              ) -> tuple[int, FiberResult] | None:
    """Smallest t in the range with a nonempty fiber, and all witnesses at that t."""
    lo, hi = t_range
    if lo < 1:
        raise EmptyRange(f"t range must start at 1 or above, got {lo}")
    if lo > hi:
        raise EmptyRange(f"empty t range [{lo}, {hi}]")
    for t in range(lo, hi + 1):
        res = fiber_classes(FiberQuery(P, t, n, primitive_only, positive_side))
        if res:
            return t, res
    return None


# ---------------------------------------------------------------------------
# brute-force oracle

@lru_cache(maxsize=32)
def _adjugate(L: Lattice) -> list[list[int]]:
    """Integer adjugate of the Gram matrix, so G^-1 = adj / det."""
    from .lattice import bareiss_det

    g = L.gram
    n = L.rank
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(g) if k != i]
            adj[j][i] = (-1) ** (i + j) * bareiss_det(minor) if n > 1 else 1
    return adj


def certified_box(P: PolarizedClass, n: int, t_cap: int, t_min: int = 1,
                  coordinates: str = "lattice") -> tuple[int, ...]:
    """Per-coordinate radius containing every F with F^2 = n and t_min <= F.C <= t_cap.

    Writing F = (t/C^2) C + w with w orthogonal to C, a coordinate of F is
    its pairing with some vector b: t (b.C)/C^2 + w.p, where p is the
    projection of b to the complement of C. Cauchy-Schwarz on the definite
    complement bounds |w.p| by sqrt((t^2/C^2 - n) ((b.C)^2/C^2 - b^2)).

    In "lattice" coordinates b runs over the dual basis; in "pairing"
    coordinates (the values F.e_i) b runs over the basis itself.
    """
    L = P.lattice
    c2 = P.self_int
    if coordinates == "lattice":
        bc = P.coords
        b2 = L.inverse_diagonal
    elif coordinates == "pairing":
        bc = L.row(P.coords)
        b2 = [L.gram[i][i] for i in range(L.rank)]
    else:
        raise ValueError(f"unknown coordinates {coordinates!r}")
    radii = [0] * L.rank
    for t in range(max(t_min, 1), t_cap + 1):
        R = Fraction(t * t, c2) - n
        if R < 0:
            continue
        for i, ci in enumerate(bc):
            s = Fraction(ci * ci, c2) - b2[i]
            lo, hi = int_interval(Fraction(t * ci, c2), R * s)
            if lo <= hi:
                radii[i] = max(radii[i], abs(lo), abs(hi))
    return tuple(radii)


def certified_cap(P: PolarizedClass, n: int, radius: int | Sequence[int], t_limit: int,
                  coordinates: str = "lattice") -> int:
    """Largest t <= t_limit such that the box covers every fiber up to t (0 if none)."""
    radii = _radii(P.lattice.rank, radius)
    cap = 0
    for t in range(1, t_limit + 1):
        need = certified_box(P, n, t, t_min=t, coordinates=coordinates)
        if any(a > b for a, b in zip(need, radii)):
            break
        cap = t
    return cap


def budget_cap(P: PolarizedClass, n: int, max_points: int, t_limit: int,
               coordinates: str = "pairing") -> tuple[int, tuple[int, ...]]:
    """Largest t <= t_limit whose certified box has at most max_points points, with that box.

    Returns (0, zero box) when even t = 1 does not fit.
    """
    rank = P.lattice.rank
    radii = (0,) * rank
    cap = 0
    for t in range(1, t_limit + 1):
        step = certified_box(P, n, t, t_min=t, coordinates=coordinates)
        grown = tuple(max(a, b) for a, b in zip(radii, step))
        if math.prod(2 * x + 1 for x in grown) > max_points:
            break
        radii, cap = grown, t
    return cap, radii


def _radii(rank: int, radius: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(radius, (int, np.integer)):
        return (int(radius),) * rank
    radii = tuple(int(r) for r in radius)
    if len(radii) != rank:
        raise ValueError(f"need {rank} radii, got {len(radii)}")
    return radii


def _scan(Q: np.ndarray, target: int, pvec: np.ndarray, hvec: np.ndarray | None,
          radii: Sequence[int], t_cap: int):
    """Yield (point, pairing) for box points with x^T Q x == target and 0 < x.pvec <= t_cap."""
    r = len(radii)
    s = 0
    while s < r - 1 and math.prod(2 * x + 1 for x in radii[s:]) > 2_000_000:
        s += 1
    inner_axes = [np.arange(-x, x + 1, dtype=np.int64) for x in radii[s:]]
    V = np.stack(np.meshgrid(*inner_axes, indexing="ij"), axis=-1).reshape(-1, r - s)
    qv = np.einsum("ij,jk,ik->i", V, Q[s:, s:], V)
    pv = V @ pvec[s:]
    hv = V @ hvec[s:] if hvec is not None else None
    for u in itertools.product(*(range(-x, x + 1) for x in radii[:s])):
        ua = np.array(u, dtype=np.int64)
        if s:
            norm = qv + V @ (2 * (Q[s:, :s] @ ua)) + int(ua @ Q[:s, :s] @ ua)
            pair = pv + int(ua @ pvec[:s])
        else:
            norm, pair = qv, pv
        mask = (norm == target) & (pair > 0) & (pair <= t_cap)
        if hv is not None:
            mask &= (hv + (int(ua @ hvec[:s]) if s else 0)) > 0
        for idx in np.nonzero(mask)[0]:
            yield tuple(u) + tuple(int(x) for x in V[idx]), int(pair[idx])


def box_oracle(P: PolarizedClass, n: int, box_radius: int | Sequence[int], t_cap: int, *,
               primitive_only: bool = False, positive_side: bool = False,
               coordinates: str = "lattice") -> dict[int, FiberResult]:
    """Scan every point of a coordinate box; return hits with F^2 = n, 0 < F.C <= t_cap.

    In "lattice" coordinates the box bounds the coefficients of F. In
    "pairing" coordinates it bounds the pairings y_i = F.e_i with the basis
    vectors, and F is recovered as G^-1 y (points with non-integral F are
    skipped). The result maps t to the sorted hits at that pairing; a
    FiberResult is flagged exhaustive when the certified box for its t fits
    inside the scan.
    """
    L = P.lattice
    rank = L.rank
    radii = _radii(rank, box_radius)
    total = math.prod(2 * x + 1 for x in radii)
    if total > BOX_LIMIT:
        raise BoxTooLarge(f"box has {total} points (limit {BOX_LIMIT})")

    G = np.array(L.gram, dtype=np.int64)
    if coordinates == "lattice":
        Q, target = G, n
        pvec = G @ np.array(P.coords, dtype=np.int64)
        hvec = G @ np.array(P.ample_ref.coords, dtype=np.int64)
        to_x = lambda y: y
    elif coordinates == "pairing":
        det = L.determinant
        adj = _adjugate(L)
        Q = np.array(adj, dtype=np.int64) * (1 if det > 0 else -1)
        target = n * abs(det)
        pvec = np.array(P.coords, dtype=np.int64)
        hvec = np.array(P.ample_ref.coords, dtype=np.int64)

        def to_x(y):
            num = [sum(a * b for a, b in zip(row, y)) for row in adj]
            if any(v % det for v in num):
                return None
            return tuple(v // det for v in num)
    else:
        raise ValueError(f"unknown coordinates {coordinates!r}")

    hits: dict[int, list[tuple[int, ...]]] = {}
    for y, t in _scan(Q, target, pvec, hvec if positive_side else None, radii, t_cap):
        F = to_x(y)
        if F is None:
            continue
        if primitive_only and math.gcd(*F) != 1:
            continue
        hits.setdefault(t, []).append(F)

    out = {}
    for t in sorted(hits):
        need = certified_box(P, n, t, t_min=t, coordinates=coordinates)
        exhaustive = all(a <= b for a, b in zip(need, radii))
        out[t] = FiberResult(tuple(LatticeVector(F, L) for F in sorted(hits[t])), exhaustive)
    return out


def oracle_minimum(P: PolarizedClass, n: int, box_radius, t_cap: int, **flags
                   ) -> tuple[int, FiberResult] | None:
    res = box_oracle(P, n, box_radius, t_cap, **flags)
    if not res:
        return None
    t = min(res)
    return t, res[t]
