"""Lattices, grids, product sets and inhomogeneous minima.

A :class:`Lattice` is a unimodular basis (columns are generators) tagged with
its numeric regime: ``"exact"`` (Fraction entries) or ``"interval"``
(:class:`~gridprod.algebraic.RatInterval` entries).  Mixing regimes always
degrades to intervals.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import _linalg as la
from . import kernels
from .algebraic import Q, RatInterval, as_interval, exp_interval, root_interval
from .errors import NotUnimodularError, PrecisionError, RefusedError, TooLargeError
from .numberfield import (
    FieldElement,
    TotallyRealField,
    UnitSet,
    coordinate_matrix,
    geometric_embedding_matrix,
    embed,
    norm,
)

EXACT = "exact"
INTERVAL = "interval"
MAX_CANDIDATES = 10 ** 8
DEFAULT_EPS = Fraction(1, 10 ** 30)


def _regime_of(entries) -> str:
    return INTERVAL if any(isinstance(x, RatInterval) for x in entries) else EXACT


def _normalize_entry(x, regime):
    if regime == INTERVAL:
        return as_interval(x)
    return Q(x)


@dataclass(frozen=True)
class CompactOrbitData:
    """Field provenance of a lattice that is a normalized geometric embedding."""

    field: TotallyRealField
    basis: tuple
    units: UnitSet
    scale: RatInterval
    eps: Fraction


@dataclass(frozen=True)
class Lattice:
    basis: tuple
    regime: str
    det: object
    field_data: CompactOrbitData | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def columns(self) -> tuple:
        return la.transpose(self.basis)

    def to_float(self) -> np.ndarray:
        return la.to_float(self.basis)


@dataclass(frozen=True)
class Grid:
    lattice: Lattice
    shift: tuple
    translation: FieldElement | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def regime(self) -> str:
        if self.lattice.regime == INTERVAL or _regime_of(self.shift) == INTERVAL:
            return INTERVAL
        return EXACT

    def is_rational(self) -> bool | None:
        """True/False when decidable; None for interval data without provenance."""
        if self.regime == EXACT:
            return True
        if self.translation is not None and self.lattice.field_data is not None:
            return True
        return None


# ---------------------------------------------------------------------------
# constructors


def from_matrix(m, *, field_data: CompactOrbitData | None = None) -> Lattice:
    rows = la.to_matrix(m)
    d = len(rows)
    if any(len(r) != d for r in rows):
        raise ValueError("basis must be square")
    regime = _regime_of([x for r in rows for x in r])
    rows = tuple(tuple(_normalize_entry(x, regime) for x in r) for r in rows)
    det = la.det(rows)
    if regime == EXACT:
        if abs(det) != 1:
            raise NotUnimodularError(f"|det| = {abs(det)} != 1", measured=abs(det))
    else:
        if not (det.contains(1) or det.contains(-1)):
            raise NotUnimodularError(f"|det| in {abs(det)!r} excludes 1", measured=abs(det))
    return Lattice(rows, regime, det, field_data)


def integer_lattice(d: int) -> Lattice:
    return from_matrix(la.identity(d))


def _enclose_vector(v, eps):
    from .numberfield import real_enclosure

    out = []
    for x in v:
        if isinstance(x, (int, Fraction, str)):
            out.append(Q(x))
        else:
            out.append(real_enclosure(x, eps))
    return out


def h_lattice(v, eps=DEFAULT_EPS) -> Lattice:
    """Columns of ``[[I, v], [0, 1]]``."""
    v = _enclose_vector(v, eps)
    d = len(v) + 1
    m = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for i, x in enumerate(v):
        m[i][d - 1] = x
    return from_matrix(m)


def z_lattice(v, eps=DEFAULT_EPS) -> Lattice:
    """Columns of ``[[1, v^t], [0, I]]``."""
    v = _enclose_vector(v, eps)
    d = len(v) + 1
    m = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for j, x in enumerate(v):
        m[0][j + 1] = x
    return from_matrix(m)


def dual(x: Lattice) -> Lattice:
    """Basis ``(B^t)^-1``."""
    return from_matrix(la.transpose(la.inverse(x.basis)))


def grid(lattice: Lattice, shift, translation: FieldElement | None = None) -> Grid:
    shift = tuple(shift)
    if len(shift) != lattice.dim:
        raise ValueError("shift dimension mismatch")
    regime = INTERVAL if lattice.regime == INTERVAL or _regime_of(shift) == INTERVAL else EXACT
    shift = tuple(_normalize_entry(x, regime) for x in shift)
    if regime == INTERVAL and lattice.regime == EXACT:
        lattice = Lattice(
            tuple(tuple(as_interval(x) for x in r) for r in lattice.basis),
            INTERVAL,
            as_interval(lattice.det),
            lattice.field_data,
        )
    return Grid(lattice, shift, translation)


def construct(kind: str, data):
    """Dispatch for the ``from_matrix/h_lattice/z_lattice/dual/grid`` constructors."""
    if kind == "from_matrix":
        return from_matrix(data)
    if kind == "h_lattice":
        return h_lattice(data)
    if kind == "z_lattice":
        return z_lattice(data)
    if kind == "dual":
        return dual(data)
    if kind == "grid":
        lattice, shift = data
        return grid(lattice, shift)
    raise ValueError(f"unknown construction {kind!r}")


def compact_lattice(K: TotallyRealField, basis: Sequence[FieldElement], units: UnitSet | None = None, eps=DEFAULT_EPS) -> Lattice:
    """Normalized geometric embedding ``c * M`` of a field lattice."""
    eps = Q(eps)
    M, c = geometric_embedding_matrix(K, basis, eps)
    data = CompactOrbitData(K, tuple(basis), units, c, eps)
    return from_matrix(la.scale(M, c), field_data=data)


def compact_grid(x: Lattice, t: FieldElement) -> Grid:
    """The grid ``x + c * phi(t)`` for a compact-orbit lattice ``x``."""
    data = x.field_data
    if data is None:
        raise RefusedError("lattice has no field provenance")
    d = x.dim
    shift = tuple(embed(t, i, data.eps) * data.scale for i in range(1, d + 1))
    return grid(x, shift, translation=t)


def apply_diagonal(y, a: Sequence) -> Grid | Lattice:
    """Act by ``diag(a)`` on a lattice or grid (rows scale)."""
    if isinstance(y, Grid):
        lat = apply_diagonal(y.lattice, a)
        return grid(lat, [ai * si for ai, si in zip(a, y.shift)], y.translation)
    rows = tuple(tuple(ai * x for x in row) for ai, row in zip(a, y.basis))
    return from_matrix(rows, field_data=None)


def apply_matrix(g, y):
    """Act linearly by ``g`` on a lattice or grid."""
    if isinstance(y, Grid):
        lat = apply_matrix(g, y.lattice)
        return grid(lat, la.matvec(g, y.shift))
    return from_matrix(la.matmul(g, y.basis))


# ---------------------------------------------------------------------------
# enumeration


def _coefficient_box(y: Grid, R) -> list[tuple[int, int]]:
    binv = la.inverse(y.lattice.basis)
    center = [-c for c in la.matvec(binv, y.shift)]
    box = []
    for j in range(y.dim):
        rad = sum((abs(as_interval(b)) for b in binv[j]), RatInterval.point(0)) * Q(R)
        c = as_interval(center[j])
        lo = math.ceil(c.lo - rad.hi)
        hi = math.floor(c.hi + rad.hi)
        box.append((lo, hi))
    return box


def candidate_count(y: Grid, R) -> int:
    n = 1
    for lo, hi in _coefficient_box(y, R):
        n *= max(hi - lo + 1, 0)
    return n


def iter_grid_points(y: Grid, R, *, conservative: bool = False, limit: int = MAX_CANDIDATES) -> Iterator[tuple[tuple, tuple]]:
    """Yield ``(coefficients, point)`` for points of ``y`` with sup norm <= R.

    In the interval regime a point whose sup norm straddles ``R`` raises
    :class:`PrecisionError`, unless ``conservative`` asks for a superset.
    """
    R = Q(R)
    if R <= 0:
        raise ValueError("R must be positive")
    box = _coefficient_box(y, R)
    count = 1
    for lo, hi in box:
        count *= max(hi - lo + 1, 0)
    if count > limit:
        raise TooLargeError(f"enumeration box has {count} candidates (limit {limit})", estimate=count)
    B = y.lattice.basis
    s = y.shift
    exact = y.regime == EXACT
    for k in itertools.product(*(range(lo, hi + 1) for lo, hi in box)):
        w = tuple(sum((B[i][j] * k[j] for j in range(y.dim)), s[i]) for i in range(y.dim))
        if exact:
            if max(abs(x) for x in w) <= R:
                yield k, w
            continue
        mags = [abs(x) for x in w]
        if all(m.hi <= R for m in mags):
            yield k, w
        elif any(m.lo > R for m in mags):
            continue
        elif conservative:
            yield k, w
        else:
            raise PrecisionError(f"point with coefficients {k} straddles the radius {R}")


def enumerate_grid_points(y: Grid, R, **kw) -> Iterator[tuple]:
    for _, w in iter_grid_points(y, R, **kw):
        yield w


def product_value(w):
    out = 1
    for x in w:
        out = out * x
    return out


@dataclass(frozen=True)
class ProductSample:
    entries: tuple
    radius: Fraction
    regime: str
    min_abs: object
    witness: tuple | None

    def rows(self):
        for w, v in self.entries:
            yield w, v


def _abs_key(v):
    if isinstance(v, RatInterval):
        a = abs(v)
        return (a.mid, a.hi)
    return (abs(v), abs(v))


def product_scan(y: Grid, R) -> ProductSample:
    """Products ``N(w)`` over grid points in the sup-norm box of radius R."""
    entries = []
    best = None
    witness = None
    for _, w in iter_grid_points(y, R):
        v = product_value(w)
        entries.append((w, v))
        if best is None or _abs_key(v) < _abs_key(best):
            best, witness = v, w
    min_abs = None if best is None else abs(best)
    return ProductSample(tuple(entries), Q(R), y.regime, min_abs, witness)


def _fmt(x) -> str:
    if isinstance(x, RatInterval):
        return f"[{float(x.lo)!r},{float(x.hi)!r}]"
    x = Q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def product_csv(sample: ProductSample, header: dict | None = None) -> str:
    buf = io.StringIO()
    meta = {"radius": _fmt(sample.radius), "regime": sample.regime}
    if header:
        meta.update(header)
    buf.write("# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    d = len(sample.entries[0][0]) if sample.entries else 0
    wr.writerow([f"w{i + 1}" for i in range(d)] + ["value"])
    for w, v in sample.entries:
        wr.writerow([_fmt(x) for x in w] + [_fmt(v)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# unit reduction


def reduction_exponents(y: Grid, stab: Sequence, bound: int = 3) -> tuple:
    if not stab:
        return ()
    B = np.array([[float(as_interval(x).mid) for x in row] for row in y.lattice.basis])
    T = np.array([[float(as_interval(x).mid) for x in s.coords] for s in stab])
    best = None
    for k in itertools.product(range(-bound, bound + 1), repeat=len(stab)):
        a = np.exp(np.array(k, dtype=float) @ T)
        score = float(np.max(np.sum(np.abs(a[:, None] * B), axis=1)))
        key = (round(score, 12), sum(abs(e) for e in k), k)
        if best is None or key < best[0]:
            best = (key, k)
    return best[1]


def unit_reduce(y: Grid, stab: Sequence, bound: int = 3) -> Grid:
    """Move ``y`` along ``exp(sum k_i stab_i)`` to minimise the max row norm."""
    k = reduction_exponents(y, stab, bound)
    if not any(k):
        return y
    d = y.dim
    t = [RatInterval.point(0)] * d
    for e, s in zip(k, stab):
        t = [ti + as_interval(si) * e for ti, si in zip(t, s.coords)]
    a = [exp_interval(ti) for ti in t]
    return apply_diagonal(y, a)


# ---------------------------------------------------------------------------
# exact minima on compact orbits


@dataclass(frozen=True)
class GridMinimum:
    min_norm: Fraction
    scale: RatInterval
    witness: FieldElement
    coefficients: tuple
    search_radius: Fraction
    candidates: int
    stabilizer_powers: tuple

    @property
    def value(self) -> RatInterval:
        """``N(y)`` of the normalized grid: ``min_norm * scale^d``."""
        return self.scale ** self.witness.field.degree * self.min_norm


def _stabilizing_power(R: tuple, t_b: tuple, kmax: int) -> int | None:
    d = len(R)
    P = la.identity(d)
    for k in range(1, kmax + 1):
        P = la.matmul(P, R)
        if any(x.denominator != 1 for row in P for x in row):
            continue
        if abs(la.det(P)) != 1:
            continue
        moved = [a - b for a, b in zip(la.matvec(P, t_b), t_b)]
        if all(x.denominator == 1 for x in moved):
            return k
    return None


def exact_grid_min_compact(
    K: TotallyRealField,
    basis: Sequence[FieldElement],
    translation: FieldElement,
    units: UnitSet,
    *,
    eps=DEFAULT_EPS,
    kmax: int = 2000,
) -> GridMinimum:
    """Exact ``min |Norm(lambda + translation)|`` over the field lattice spanned by ``basis``.

    Every unit orbit of grid elements has a representative with all
    ``|sigma_i| <= C`` where ``C = exp(rho) * best^(1/d)`` and ``rho`` bounds
    the sup-norm covering radius of the grid-stabilizing unit log lattice,
    so enumerating that box is complete.
    """
    d = K.degree
    basis = tuple(basis)
    eps = Q(eps)
    M, scale = geometric_embedding_matrix(K, basis, eps)
    C = coordinate_matrix(basis)
    Cinv = la.inverse(C)
    t_b = la.matvec(Cinv, translation.coords)
    if all(x.denominator == 1 for x in t_b):
        return GridMinimum(Fraction(0), scale, K.zero(), tuple(-int(x) for x in t_b), Fraction(0), 1, ())
    if units is None or units.rank < d - 1:
        raise RefusedError("unit rank below d-1: completeness cannot be certified")
    gens = [units.units[i] for i in units.independent[: d - 1]]
    powers = []
    rho = Fraction(0)
    from .numberfield import log_embedding

    for u in gens:
        R = la.matmul(la.matmul(Cinv, u.mult_matrix()), C)
        k = _stabilizing_power(R, t_b, kmax)
        if k is None:
            raise RefusedError(f"no power <= {kmax} of {u} stabilizes the grid")
        powers.append(k)
        lv = log_embedding(u)
        rho += k * max(abs(x).hi for x in lv) / 2

    def element(coeffs):
        z = translation
        for c, b in zip(coeffs, basis):
            if c:
                z = z + b * c
        return z

    best = None
    for coeffs in itertools.product((-1, 0, 1), repeat=d):
        z = element(coeffs)
        n = abs(norm(z))
        if best is None or n < best[0]:
            best = (n, coeffs, z)
    bound = exp_interval(rho) * root_interval(best[0], d)
    shift = tuple(embed(translation, i, eps) for i in range(1, d + 1))
    y = Grid(Lattice(M, INTERVAL, la.det(M)), shift, translation)
    box = _coefficient_box(y, bound.hi)
    total = 1
    for lo, hi in box:
        total *= max(hi - lo + 1, 0)
    if total > MAX_CANDIDATES:
        raise TooLargeError(f"search box has {total} candidates", estimate=total)
    # float screening with a generous margin; survivors are decided exactly
    Mf = np.array([[float(x.mid) for x in row] for row in M])
    sf = np.array([float(x.mid) for x in shift])
    ranges = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in box]
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
    pts = mesh @ Mf.T + sf
    R = float(bound.hi)
    inside = np.max(np.abs(pts), axis=1) <= R * (1 + 1e-9) + 1e-9
    mesh, pts = mesh[inside], pts[inside]
    count = len(mesh)
    fnorm = np.abs(np.prod(pts, axis=1))
    cut = float(best[0]) * (1 + 1e-6) + 1e-12 * (1 + R) ** d
    for i in np.nonzero(fnorm <= cut)[0]:
        coeffs = tuple(int(c) for c in mesh[i])
        z = element(coeffs)
        n = abs(norm(z))
        if n < best[0] or (n == best[0] and coeffs < best[1]):
            best = (n, coeffs, z)
    return GridMinimum(best[0], scale, best[2], tuple(best[1]), bound.hi, count, tuple(powers))


# ---------------------------------------------------------------------------
# inhomogeneous minimum


@dataclass(frozen=True)
class MuResult:
    value: object
    mode: str
    label: str
    ledger: tuple
    witness: object = None

    def ledger_json(self, header: dict | None = None) -> str:
        out = {
            "mode": self.mode,
            "label": self.label,
            "value": _fmt(self.value),
            "entries": list(self.ledger),
        }
        if isinstance(self.value, RatInterval):
            out["certified_lower_bound"] = _fmt(self.value.lo)
        if header:
            out.update(header)
        return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _grid_min_sample(x: Lattice, j: tuple, k: int, R: Fraction):
    """Exact min |N(w)| over the torus sample point ``B j / k`` (exact regime)."""
    d = x.dim
    den = 1
    for row in x.basis:
        for e in row:
            den = den * e.denominator // math.gcd(den, e.denominator)
    Bint = [[int(e * den) for e in row] for row in x.basis]
    shift = la.matvec(x.basis, [Fraction(ji, k) for ji in j])
    y = grid(x, shift)
    box = _coefficient_box(y, R)
    Rint = R * den * k
    if Rint.denominator != 1:
        Rint = Fraction(math.floor(Rint))
    res = kernels.grid_min_int(Bint, k, list(j), box, int(Rint))
    if res is None:
        return None, None
    prod, n = res
    w = tuple(Fraction(sum(Bint[i][c] * (k * n[c] + j[c]) for c in range(d)), den * k) for i in range(d))
    return Fraction(abs(prod), (den * k) ** d), w


def _grid_min_float(x: Lattice, j: tuple, k: int, R: float):
    B = x.to_float()
    v = B @ (np.array(j, dtype=float) / k)
    binv = np.linalg.inv(B)
    center = -binv @ v
    rad = np.abs(binv).sum(axis=1) * R
    ranges = [np.arange(math.ceil(c - r - 1e-9), math.floor(c + r + 1e-9) + 1) for c, r in zip(center, rad)]
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, x.dim)
    pts = mesh @ B.T + v
    inside = np.max(np.abs(pts), axis=1) <= R
    pts = pts[inside]
    if len(pts) == 0:
        return None, None
    prods = np.abs(np.prod(pts, axis=1))
    i = int(np.argmin(prods))
    return float(prods[i]), tuple(float(a) for a in pts[i])


def mu_estimate(x: Lattice, mode: str = "sample", *, k: int = 8, R=5, m_max: int = 2, workers: int = 1) -> MuResult:
    """Estimate or certify-from-below the inhomogeneous minimum of ``x``.

    ``sample`` maximises the truncated grid minimum over the ``k^d`` torus
    points ``B j / k``: an estimate, neither an upper nor a lower bound.
    ``certified_rational`` maximises exact grid minima over rational
    translations with denominator <= ``m_max``: a certified lower bound.
    """
    if mode == "sample":
        js = list(itertools.product(range(k), repeat=x.dim))
        if x.regime == EXACT:
            fn = lambda j: _grid_min_sample(x, j, k, Q(R))
        else:
            fn = lambda j: _grid_min_float(x, j, k, float(R))
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                vals = list(ex.map(fn, js))
        else:
            vals = [fn(j) for j in js]
        ledger = []
        best = None
        for j, (v, w) in zip(js, vals):
            ledger.append({"translation": [f"{a}/{k}" for a in j], "grid_min": None if v is None else _fmt(v) if not isinstance(v, float) else repr(v)})
            if v is not None and (best is None or v > best[0]):
                best = (v, j, w)
        return MuResult(best[0], mode, "estimate", tuple(ledger), best[1])
    if mode == "certified_rational":
        data = x.field_data
        if data is None:
            raise RefusedError("certified mode needs a compact-orbit lattice with field data")
        K = data.field
        d = K.degree
        best = None
        ledger = []
        seen = set()
        for m in range(1, m_max + 1):
            for j in itertools.product(range(m), repeat=d):
                key = tuple(Fraction(a, m) for a in j)
                if key in seen:
                    continue
                seen.add(key)
                t = K.zero()
                for a, b in zip(key, data.basis):
                    t = t + b * a
                res = exact_grid_min_compact(K, data.basis, t, data.units, eps=data.eps)
                val = res.value
                ledger.append({
                    "translation": [_fmt(a) for a in key],
                    "min_norm": _fmt(res.min_norm),
                    "grid_min": _fmt(val),
                    "witness": [_fmt(c) for c in res.witness.coords],
                })
                if best is None or val.lo > best[0].lo:
                    best = (val, key)
        return MuResult(best[0], mode, "certified_lower_bound", tuple(ledger), best[1])
    raise ValueError(f"unknown mode {mode!r}")
