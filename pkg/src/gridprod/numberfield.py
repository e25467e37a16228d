"""Totally real quadratic and cubic fields with exact arithmetic.

Elements are coordinate vectors in the power basis ``1, theta, ..., theta^(d-1)``
of ``Q[x]/(f)``.  Real embeddings are indexed from 1 in ascending order of
the roots of ``f``; every matrix built downstream inherits that order.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _linalg as la
from .algebraic import (
    IntPoly,
    Q,
    RatInterval,
    discriminant,
    eval_interval,
    isolate_roots,
    log_interval,
    poly_divmod,
    poly_mul,
    poly_trim,
    refine_root,
    resultant,
    root_interval,
)
from .errors import FieldError, PrecisionError


@dataclass(frozen=True)
class TotallyRealField:
    poly: IntPoly
    roots: tuple

    @property
    def degree(self) -> int:
        return self.poly.degree

    def element(self, coords) -> "FieldElement":
        coords = tuple(Q(c) for c in coords)
        if len(coords) < self.degree:
            coords = coords + (Fraction(0),) * (self.degree - len(coords))
        return FieldElement(self, coords)

    def one(self) -> "FieldElement":
        return self.element((1,))

    def zero(self) -> "FieldElement":
        return self.element(())

    def gen(self) -> "FieldElement":
        return self.element((0, 1))

    @property
    def discriminant(self) -> Fraction:
        return discriminant(self.poly.coeffs)

    def __repr__(self):
        return f"TotallyRealField({self.poly.coeffs})"


def make_field(f) -> TotallyRealField:
    """Validate a monic quadratic or cubic and isolate its real roots."""
    if not isinstance(f, IntPoly):
        f = IntPoly(tuple(f))
    if f.coeffs[-1] != 1:
        raise FieldError(f"{f} is not monic")
    if f.degree not in (2, 3):
        raise FieldError(f"degree {f.degree} is not supported (need 2 or 3)")
    c0 = f.coeffs[0]
    if c0 == 0:
        raise FieldError(f"{f} has the rational root 0")
    # monic integer polynomial: rational roots are integer divisors of c0
    for r in _divisors(abs(c0)):
        for s in (r, -r):
            if f(s) == 0:
                raise FieldError(f"{f} is reducible: rational root {s}")
    roots = isolate_roots(f)
    if len(roots) != f.degree:
        raise FieldError(f"{f} is not totally real: {len(roots)} of {f.degree} roots are real")
    return TotallyRealField(f, tuple(roots))


def _divisors(n: int) -> list[int]:
    out = []
    for k in range(1, math.isqrt(n) + 1):
        if n % k == 0:
            out.extend({k, n // k})
    return sorted(out)


def _reduce(p, f: IntPoly) -> tuple:
    _, r = poly_divmod(p, f.coeffs)
    return r


@dataclass(frozen=True)
class FieldElement:
    field: TotallyRealField
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.field.degree:
            raise ValueError("coordinate vector length must equal the field degree")

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other
        return self.field.element((Q(other),))

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a * other for a in self.coords))
        other = self._coerce(other)
        return self.field.element(_reduce(poly_mul(self.coords, other.coords), self.field.poly))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        m = self.mult_matrix()
        col = la.matvec(la.inverse(m), (1,) + (0,) * (self.field.degree - 1))
        return self.field.element(col)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.field.one(), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_integral_coords(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def mult_matrix(self) -> tuple:
        """Matrix of ``x -> self*x`` in the power basis (columns = images of theta^j)."""
        d = self.field.degree
        cols = []
        for j in range(d):
            basis_j = self.field.element((0,) * j + (1,))
            cols.append((self * basis_j).coords)
        return la.transpose(cols)

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.coords]})"


def elem_arith(a: FieldElement, b: FieldElement | None, op: str) -> FieldElement:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise ValueError(f"unknown op {op!r}")


def norm_trace(a: FieldElement) -> tuple[Fraction, Fraction]:
    """Exact norm (resultant with the defining polynomial) and trace."""
    if a.is_zero():
        return Fraction(0), Fraction(0)
    norm = resultant(a.field.poly.coeffs, poly_trim(a.coords))
    trace = sum(a.mult_matrix()[i][i] for i in range(a.field.degree))
    return Q(norm), Q(trace)


def norm(a: FieldElement) -> Fraction:
    return norm_trace(a)[0]


def _int_norm(mult_cols: Sequence[Sequence[int]], coords: Sequence[int]) -> int:
    # det of sum_k coords[k] * M_{theta^k}, all integer
    d = len(coords)
    m = [[sum(coords[k] * mult_cols[k][i][j] for k in range(d)) for j in range(d)] for i in range(d)]
    if d == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def embed(a: FieldElement, i: int, eps) -> RatInterval:
    """Interval of width <= eps containing the i-th real embedding (1-based)."""
    K = a.field
    if not 1 <= i <= K.degree:
        raise IndexError(f"embedding index {i} outside 1..{K.degree}")
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    coeffs = poly_trim(a.coords)
    if len(coeffs) <= 1:
        return RatInterval.point(coeffs[0] if coeffs else 0)
    root = K.roots[i - 1]
    step = eps
    while True:
        r = refine_root(root, step)
        out = eval_interval(coeffs, r.interval)
        if out.width <= eps:
            return out
        step = step * min(Fraction(1, 4), eps / out.width / 2)


@dataclass(frozen=True)
class EmbeddedReal:
    """The real number sigma_i(a), refinable on demand."""

    element: FieldElement
    index: int

    def enclosure(self, eps) -> RatInterval:
        return embed(self.element, self.index, eps)

    def __float__(self):
        return float(self.enclosure(Fraction(1, 1 << 60)).mid)


def real_enclosure(x, eps) -> RatInterval:
    """Enclosure of a rational, interval, RealRoot or EmbeddedReal."""
    if isinstance(x, RatInterval):
        return x
    if isinstance(x, (int, Fraction, str)):
        return RatInterval.point(Q(x))
    if hasattr(x, "enclosure"):
        return x.enclosure(eps)
    raise TypeError(f"cannot enclose {x!r}")


def log_embedding(a: FieldElement, eps=Fraction(1, 10 ** 40), max_tries: int = 8) -> tuple:
    """Interval vector (log|sigma_i(a)|)_i; refines until every |sigma_i| excludes 0."""
    out = []
    for i in range(1, a.field.degree + 1):
        e = Q(eps)
        for _ in range(max_tries):
            s = abs(embed(a, i, e))
            if s.lo > 0:
                break
            e = e * e
        else:
            raise PrecisionError(f"embedding {i} of {a} not separated from 0")
        out.append(log_interval(s))
    return tuple(out)


@dataclass(frozen=True)
class UnitSet:
    field: TotallyRealField
    units: tuple
    log_vectors: tuple
    rank: int
    independent: tuple = ()
    height: int = 0
    n_found: int = 0

    def entry_sums(self) -> list[RatInterval]:
        return [sum(v, RatInterval.point(0)) for v in self.log_vectors]


def _gram_det(u, v) -> RatInterval:
    uu = sum((x * x for x in u), RatInterval.point(0))
    vv = sum((x * x for x in v), RatInterval.point(0))
    uv = sum((x * y for x, y in zip(u, v)), RatInterval.point(0))
    return uu * vv - uv * uv


def certified_rank(log_vectors: Sequence[Sequence[RatInterval]], dim: int) -> tuple[int, tuple]:
    """Rank of interval log vectors, asserted only when a Gram determinant excludes 0."""
    best: tuple = ()
    for i, v in enumerate(log_vectors):
        if any(x.excludes_zero() for x in v):
            best = (i,)
            break
    if not best or dim < 2:
        return len(best), best
    for i, j in itertools.combinations(range(len(log_vectors)), 2):
        if _gram_det(log_vectors[i], log_vectors[j]).excludes_zero():
            return 2, (i, j)
    return 1, best


def _express(u: FieldElement, gens: list, gen_logs: np.ndarray, u_log: np.ndarray, bound: int):
    """Find exponents |e|<=bound with u = +-prod gens^e, verified exactly."""
    k = len(gens)
    if k == 0:
        return None
    # independent subset by float rank; the rest is brute-forced
    indep: list[int] = []
    for i in range(k):
        trial = gen_logs[indep + [i]]
        if np.linalg.matrix_rank(trial, tol=1e-9) == len(indep) + 1:
            indep.append(i)
    dep = [i for i in range(k) if i not in indep]
    A = gen_logs[indep].T
    for extra in itertools.product(range(-bound, bound + 1), repeat=len(dep)):
        target = u_log - sum((e * gen_logs[i] for e, i in zip(extra, dep)), np.zeros_like(u_log))
        sol, *_ = np.linalg.lstsq(A, target, rcond=None)
        e_ind = np.rint(sol).astype(int)
        if np.any(np.abs(e_ind) > bound):
            continue
        if np.max(np.abs(A @ e_ind - target)) > 1e-6:
            continue
        exps = [0] * k
        for e, i in zip(e_ind, indep):
            exps[i] = int(e)
        for e, i in zip(extra, dep):
            exps[i] = e
        prod = u.field.one()
        for g, e in zip(gens, exps):
            if e:
                prod = prod * g ** e
        if prod == u or prod == -u:
            return exps
    return None


def _unit_scan(K: TotallyRealField, H: int, first_values: Sequence[int]) -> list[tuple]:
    d = K.degree
    mult_cols = [K.element((0,) * k + (1,)).mult_matrix() for k in range(d)]
    mult_cols = [[[int(x) for x in row] for row in m] for m in mult_cols]
    found = []
    for c0 in first_values:
        for rest in itertools.product(range(-H, H + 1), repeat=d - 1):
            coords = (c0,) + rest
            n = _int_norm(mult_cols, coords)
            if n == 1 or n == -1:
                found.append(coords)
    return found


def find_units(K: TotallyRealField, H: int, *, workers: int = 1, exponent_bound: int = 5) -> UnitSet:
    """Exhaustive unit search over the coordinate box ``|c_i| <= H``."""
    if H < 0:
        raise ValueError("H must be nonnegative")
    values = list(range(-H, H + 1))
    if workers > 1:
        parts = [values[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(workers) as ex:
            chunks = list(ex.map(lambda p: _unit_scan(K, H, p), parts))
        found = [c for chunk in chunks for c in chunk]
    else:
        found = _unit_scan(K, H, values)
    d = K.degree
    torsion = {(1,) + (0,) * (d - 1), (-1,) + (0,) * (d - 1)}
    n_found = sum(1 for c in found if c not in torsion)
    # one representative per +-pair: first nonzero coordinate positive
    reps = {c if next(x for x in c if x) > 0 else tuple(-x for x in c) for c in found if c not in torsion}
    reps = sorted(reps, key=lambda c: (max(abs(x) for x in c), sum(abs(x) for x in c), c))
    gens: list[FieldElement] = []
    logs: list[tuple] = []
    for coords in reps:
        u = K.element(coords)
        lv = log_embedding(u)
        lv_f = np.array([float(x.mid) for x in lv])
        if gens and _express(u, gens, np.array([[float(x.mid) for x in v] for v in logs]), lv_f, exponent_bound) is not None:
            continue
        gens.append(u)
        logs.append(lv)
    rank, indep = certified_rank(logs, d - 1)
    return UnitSet(K, tuple(gens), tuple(logs), rank, indep, H, n_found)


def geometric_embedding_matrix(K: TotallyRealField, basis: Sequence[FieldElement], eps) -> tuple:
    """Interval matrix ``M[i][j] = sigma_{i+1}(basis_j)`` and the scale c with ``|det(cM)| = 1``."""
    d = K.degree
    if len(basis) != d:
        raise FieldError(f"need {d} basis elements, got {len(basis)}")
    coord_det = la.det(la.transpose([b.coords for b in basis]))
    if coord_det == 0:
        raise FieldError("basis elements are linearly dependent over Q")
    eps = Q(eps)
    M = tuple(tuple(embed(b, i, eps) for b in basis) for i in range(1, d + 1))
    dm = abs(la.det(M))
    return M, root_interval(dm.inverse(), d)


def embedding_discriminant(K: TotallyRealField, basis: Sequence[FieldElement]) -> Fraction:
    """Exact ``det(M)^2`` = (coordinate determinant)^2 * disc(f)."""
    coord_det = la.det(la.transpose([b.coords for b in basis]))
    return coord_det ** 2 * K.discriminant


def coordinate_matrix(basis: Sequence[FieldElement]) -> tuple:
    """Columns are the power-basis coordinates of the basis elements."""
    return la.transpose([b.coords for b in basis])


# ---------------------------------------------------------------------------
# descriptor files


def _q_str(x: Fraction) -> str:
    x = Q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def descriptor(units: UnitSet, extra: dict | None = None) -> dict:
    K = units.field
    out = {
        "poly": list(K.poly.coeffs),
        "height": units.height,
        "rank": units.rank,
        "independent": list(units.independent),
        "units": [[_q_str(c) for c in u.coords] for u in units.units],
    }
    if extra:
        out.update(extra)
    return out


def dump_descriptor(units: UnitSet, extra: dict | None = None) -> str:
    return json.dumps(descriptor(units, extra), indent=2, sort_keys=True) + "\n"


def load_descriptor(obj) -> UnitSet:
    """Rebuild a UnitSet from a descriptor; norms and ranks are re-verified."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    K = make_field(obj["poly"])
    units = [K.element([Q(c) for c in u]) for u in obj.get("units", [])]
    for u in units:
        if norm(u) not in (1, -1):
            raise FieldError(f"descriptor lists a non-unit {u}")
    logs = [log_embedding(u) for u in units]
    rank, indep = certified_rank(logs, K.degree - 1)
    return UnitSet(K, tuple(units), tuple(logs), rank, indep, int(obj.get("height", 0)), len(units))
