"""Diagonal flows, root groups and the matrix factorizations used around them.

Group elements are affine maps ``w -> L w + s`` with ``det L = 1``.  Roots are
1-based: ``Root.pair(i, j)`` is ``t_i - t_j`` with root group ``I + s E_ij``,
``Root.single(k)`` is ``t_k`` with root group the translation by ``s e_k``.
"""

from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _linalg as la
from . import homspace as hs
from .algebraic import Q, RatInterval, as_interval, exp_interval, log_interval
from .errors import (
    NotRegularError,
    NotUnimodularError,
    OpenCellError,
    PatternError,
    PrecisionError,
    RefusedError,
)
from .numberfield import (
    FieldElement,
    TotallyRealField,
    UnitSet,
    coordinate_matrix,
    embed,
    geometric_embedding_matrix,
    log_embedding,
)

_ZERO = RatInterval.point(0)


def _is_zero(x) -> bool:
    return x == 0 if not isinstance(x, RatInterval) else (x.is_point and x.lo == 0)


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class FlowVector:
    """A trace-zero vector; entries are Fractions or RatIntervals."""

    coords: tuple

    def __post_init__(self):
        t = tuple(x if isinstance(x, RatInterval) else Q(x) for x in self.coords)
        object.__setattr__(self, "coords", t)
        s = sum(t, Fraction(0))
        if isinstance(s, RatInterval):
            if not s.contains(0):
                raise ValueError(f"entries sum to {s!r}, not 0")
        elif s != 0:
            raise ValueError(f"entries sum to {s}, not 0")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def exact(self) -> bool:
        return not any(isinstance(x, RatInterval) for x in self.coords)

    def __add__(self, other: "FlowVector") -> "FlowVector":
        return FlowVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __mul__(self, k) -> "FlowVector":
        return FlowVector(tuple(x * k for x in self.coords))

    __rmul__ = __mul__

    def to_float(self) -> np.ndarray:
        return np.array([float(as_interval(x).mid) for x in self.coords])


@dataclass(frozen=True)
class Root:
    kind: str
    i: int
    j: int | None = None

    @classmethod
    def pair(cls, i: int, j: int) -> "Root":
        if i == j:
            raise ValueError("pair root needs i != j")
        return cls("pair", i, j)

    @classmethod
    def single(cls, k: int) -> "Root":
        return cls("single", k)

    def check(self, d: int) -> None:
        idx = (self.i,) if self.kind == "single" else (self.i, self.j)
        if any(not 1 <= x <= d for x in idx):
            raise ValueError(f"root {self} has an index outside 1..{d}")

    def value(self, t):
        t = t.coords if isinstance(t, FlowVector) else tuple(t)
        self.check(len(t))
        if self.kind == "pair":
            return t[self.i - 1] - t[self.j - 1]
        return t[self.k_index]

    @property
    def k_index(self) -> int:
        return self.i - 1

    def character(self, a: Sequence):
        """``exp(alpha(log a))`` for a positive diagonal ``a``."""
        self.check(len(a))
        if self.kind == "pair":
            return a[self.i - 1] / a[self.j - 1]
        return a[self.i - 1]

    def __str__(self):
        return f"pair({self.i},{self.j})" if self.kind == "pair" else f"single({self.i})"


def all_roots(d: int, singles: bool = True) -> list[Root]:
    out = [Root.pair(i, j) for i in range(1, d + 1) for j in range(1, d + 1) if i != j]
    if singles:
        out += [Root.single(k) for k in range(1, d + 1)]
    return out


def _exact(x):
    return x if isinstance(x, RatInterval) else Q(x)


@dataclass(frozen=True)
class AffineMap:
    linear: tuple
    shift: tuple

    def __post_init__(self):
        lin = tuple(tuple(_exact(x) for x in row) for row in self.linear)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "shift", tuple(_exact(x) for x in self.shift))
        det = la.det(lin)
        if isinstance(det, RatInterval):
            if not det.contains(1):
                raise NotUnimodularError(f"det in {det!r} excludes 1", measured=det)
        elif det != 1:
            raise NotUnimodularError(f"det = {det} != 1", measured=det)

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls(la.identity(d), (Fraction(0),) * d)

    @classmethod
    def linear_map(cls, m) -> "AffineMap":
        m = la.to_matrix(m)
        return cls(m, (Fraction(0),) * len(m))

    @property
    def dim(self) -> int:
        return len(self.linear)

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        lin = la.matmul(self.linear, other.linear)
        sh = tuple(a + b for a, b in zip(la.matvec(self.linear, other.shift), self.shift))
        return AffineMap(lin, sh)

    def inverse(self) -> "AffineMap":
        inv = la.inverse(self.linear)
        return AffineMap(inv, tuple(-x for x in la.matvec(inv, self.shift)))

    def __call__(self, w):
        return tuple(a + b for a, b in zip(la.matvec(self.linear, w), self.shift))


def diagonal_map(a: Sequence) -> AffineMap:
    return AffineMap.linear_map(la.diag(a))


def root_element(alpha: Root, s, d: int) -> AffineMap:
    """The root group element ``u_alpha(s)``."""
    alpha.check(d)
    lin = [list(r) for r in la.identity(d)]
    shift = [Fraction(0)] * d
    if alpha.kind == "pair":
        lin[alpha.i - 1][alpha.j - 1] = s
    else:
        shift[alpha.i - 1] = s
    return AffineMap(lin, shift)


def act(g: AffineMap, y):
    """Apply ``g`` to a Lattice (linear part only) or to a Grid."""
    if isinstance(y, hs.Grid):
        lat = hs.apply_matrix(g.linear, y.lattice)
        return hs.grid(lat, g(y.shift))
    return hs.apply_matrix(g.linear, y)


# ---------------------------------------------------------------------------
# flow


def _exp_vector(v: FlowVector) -> tuple:
    if all(_is_zero(x) for x in v.coords):
        return tuple(Fraction(1) for _ in v.coords)
    return tuple(exp_interval(x) for x in v.coords)


def _log_diagonal(a: Sequence) -> FlowVector:
    a = tuple(x if isinstance(x, RatInterval) else Q(x) for x in a)
    prod = Fraction(1)
    for x in a:
        prod = prod * x
    if isinstance(prod, RatInterval):
        if not prod.contains(1) or any(as_interval(x).lo <= 0 for x in a):
            raise NotUnimodularError(f"diagonal product {prod!r} is not 1", measured=prod)
    elif prod != 1 or any(x <= 0 for x in a):
        raise NotUnimodularError(f"diagonal {a} is not positive with product 1", measured=prod)
    return FlowVector(tuple(Fraction(0) if x == 1 else log_interval(x) for x in a))


def flow(kind: str, data):
    """``exp``: FlowVector -> diagonal; ``log``: diagonal -> FlowVector;
    ``root_value``: ``(Root, t)`` -> alpha(t)."""
    if kind == "exp":
        return _exp_vector(data if isinstance(data, FlowVector) else FlowVector(data))
    if kind == "log":
        return _log_diagonal(data)
    if kind == "root_value":
        alpha, t = data
        return alpha.value(t)
    raise ValueError(f"unknown flow operation {kind!r}")


@dataclass(frozen=True)
class Conjugation:
    scaled: object
    factor: object
    identity_holds: bool | None


def conjugate_unipotent(a: Sequence, alpha: Root, t) -> Conjugation:
    """``a u_alpha(t) a^-1 = u_alpha(t')`` with ``t' = exp(alpha(log a)) t``.

    For rational ``a`` the identity is checked entrywise; with interval data
    the check reports None.
    """
    d = len(a)
    _log_diagonal(a)
    alpha.check(d)
    t = t if isinstance(t, RatInterval) else Q(t)
    factor = alpha.character(a)
    tp = factor * t
    A = diagonal_map(a)
    lhs = A @ root_element(alpha, t, d) @ A.inverse()
    rhs = root_element(alpha, tp, d)
    if la.is_interval_matrix(lhs.linear) or isinstance(tp, RatInterval):
        holds = None
    else:
        holds = lhs.linear == rhs.linear and lhs.shift == rhs.shift
    return Conjugation(tp, factor, holds)


# ---------------------------------------------------------------------------
# horospherical splitting


def _sign(x) -> int:
    if isinstance(x, RatInterval):
        return x.sign()
    return (x > 0) - (x < 0)


def _log_order(b: Sequence) -> list[Fraction]:
    # log b_i is only compared, so the rational b_i themselves serve as keys
    return [Q(x) for x in b]


def horospherical_split(g: AffineMap, b: Sequence) -> tuple:
    """Factor ``g = c u_plus u_minus`` relative to the positive diagonal ``b``.

    ``u_minus`` is contracted by ``b^n . b^-n`` and ``u_plus`` by ``b^-n . b^n``.
    Regularity is required for the roots that can carry a nonzero entry of
    ``g``: all pair roots, and single roots when ``g`` has a translation part.
    """
    d = g.dim
    b = _log_order(b)
    if len(b) != d:
        raise ValueError("dimension mismatch")
    _log_diagonal(b)
    has_shift = any(not _is_zero(x) for x in g.shift)
    vanishing = [r for r in all_roots(d, singles=has_shift) if r.character(b) == 1]
    if vanishing:
        raise NotRegularError(
            "b is not regular: " + ", ".join(str(r) for r in vanishing), vanishing
        )
    order = sorted(range(d), key=lambda i: -b[i])  # decreasing b
    pos = {k: n for n, k in enumerate(order)}
    gs = [[g.linear[order[r]][order[c]] for c in range(d)] for r in range(d)]
    # g' = D U L in sorted coordinates, via LDU of the reversed matrix
    rev = list(range(d - 1, -1, -1))
    h = [[gs[rev[r]][rev[c]] for c in range(d)] for r in range(d)]
    for k in range(1, d + 1):
        if _is_zero(la.det([row[:k] for row in h[:k]])):
            raise OpenCellError(f"trailing principal minor of size {k} vanishes in b-order")
    L1, D1, U1 = _ldu(h)
    # g' = (J L1 J)(J D1 J)(J U1 J): upper unit, diagonal, lower unit
    Us = [[L1[rev[r]][rev[c]] for c in range(d)] for r in range(d)]
    Ds = [D1[rev[r]] for r in range(d)]
    Ls = [[U1[rev[r]][rev[c]] for c in range(d)] for r in range(d)]
    # U D = D (D^-1 U D)
    Up = [[Us[r][c] * Ds[c] / Ds[r] for c in range(d)] for r in range(d)]

    def unsort(m):
        return tuple(tuple(m[pos[r]][pos[c]] for c in range(d)) for r in range(d))

    c_diag = tuple(Ds[pos[i]] for i in range(d))
    Lin_plus = unsort(Up)
    Lin_minus = unsort(Ls)
    # translation: c^-1 v = U v_minus + v_plus, v_minus on contracted coordinates
    v = tuple(x / c for x, c in zip(g.shift, c_diag))
    contracted = [i for i in range(d) if b[i] < 1]
    vm = [Fraction(0)] * d
    # back substitution in sorted order (upper triangular, contracted coords are last)
    for i in sorted(contracted, key=lambda i: pos[i], reverse=True):
        acc = v[i]
        for j in contracted:
            if pos[j] > pos[i]:
                acc = acc - Lin_plus[i][j] * vm[j]
        vm[i] = acc
    Uv = la.matvec(Lin_plus, vm)
    vp = tuple(a - b_ for a, b_ in zip(v, Uv))
    c = diagonal_map(c_diag)
    u_plus = AffineMap(Lin_plus, vp)
    u_minus = AffineMap(Lin_minus, tuple(vm))
    return c, u_plus, u_minus


def _ldu(m):
    """Doolittle ``m = L D U`` without pivoting (leading minors nonzero)."""
    d = len(m)
    a = [list(r) for r in m]
    L = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for k in range(d):
        for i in range(k + 1, d):
            f = a[i][k] / a[k][k]
            L[i][k] = f
            for j in range(k, d):
                a[i][j] = a[i][j] - f * a[k][j]
    D = [a[k][k] for k in range(d)]
    U = [[(a[i][j] / a[i][i] if j > i else Fraction(int(i == j))) for j in range(d)] for i in range(d)]
    return L, D, U


def in_horospherical(u: AffineMap, b: Sequence, sign: int) -> bool:
    """Zero-pattern membership of ``u`` in ``U^+(b)`` (sign=+1) or ``U^-(b)`` (sign=-1)."""
    d = u.dim
    b = _log_order(b)
    for i in range(d):
        if u.linear[i][i] != 1:
            return False
        for j in range(d):
            if i != j and not _is_zero(u.linear[i][j]):
                ch = b[i] / b[j]
                if (ch > 1) != (sign > 0) or ch == 1:
                    return False
        if not _is_zero(u.shift[i]):
            if (b[i] > 1) != (sign > 0) or b[i] == 1:
                return False
    return True


# ---------------------------------------------------------------------------
# compact orbits


@dataclass(frozen=True)
class StabilizerData:
    omega_basis: tuple
    unit_elems: tuple
    index_note: RatInterval
    verification: tuple = field(default=(), compare=False)
    lattice: object = field(default=None, compare=False)

    @property
    def rank(self) -> int:
        return len(self.omega_basis)

    @property
    def dim(self) -> int:
        return self.omega_basis[0].dim if self.omega_basis else 0


@dataclass(frozen=True)
class StabilizerCheck:
    unit: FieldElement
    exact: tuple
    enclosure: tuple
    max_width: Fraction
    contains: bool


def _verify_stabilizer(K, basis, w: FieldElement, eps) -> StabilizerCheck:
    d = K.degree
    M, _ = geometric_embedding_matrix(K, basis, eps)
    D = la.diag([embed(w, i, eps) for i in range(1, d + 1)])
    enc = la.matmul(la.matmul(la.inverse(M), D), M)
    C = coordinate_matrix(basis)
    exact = la.matmul(la.matmul(la.inverse(C), w.mult_matrix()), C)
    width = max(x.width for row in enc for x in row)
    ok = all(e.contains(x) for er, xr in zip(enc, exact) for e, x in zip(er, xr))
    return StabilizerCheck(w, exact, enc, width, ok)


def compact_orbit_lattice(
    K: TotallyRealField,
    basis: Sequence[FieldElement],
    units: UnitSet,
    *,
    eps=hs.DEFAULT_EPS,
    tolerance=Fraction(1, 10 ** 8),
) -> tuple:
    """Normalized lattice of ``basis`` plus stabilizer data from unit squares.

    Each squared unit is verified: ``B^-1 diag(sigma(w)) B`` must enclose the
    exact multiplication matrix with every entry narrower than ``tolerance``.
    """
    d = K.degree
    if units.rank < d - 1:
        raise RefusedError(f"unit rank {units.rank} < {d - 1}")
    gens = [units.units[i] for i in units.independent[: d - 1]]
    squares = [u * u for u in gens]
    eps = Q(eps)
    checks = []
    for w in squares:
        e = eps
        for _ in range(4):
            chk = _verify_stabilizer(K, basis, w, e)
            if chk.max_width < tolerance:
                break
            e = e * e
        else:
            raise PrecisionError(f"stabilizer check for {w} too wide: {float(chk.max_width)}")
        if not chk.contains:
            raise PrecisionError(f"stabilizer check for {w} misses the exact matrix")
        checks.append(chk)
    omegas = tuple(FlowVector(log_embedding(w)) for w in squares)
    x0 = hs.compact_lattice(K, basis, units, eps)
    if d == 1:
        cov = RatInterval.point(1)
    else:
        cov = abs(la.det([w.coords[: d - 1] for w in omegas]))
    return x0, StabilizerData(omegas, tuple(squares), cov, tuple(checks), x0)


# ---------------------------------------------------------------------------
# independence


@dataclass(frozen=True)
class IndependenceReport:
    status: str  # "independent_to_bound" or "inconclusive"
    coeff_bound: int
    smallest: RatInterval | None
    witness: tuple | None
    straddles: tuple = ()

    @property
    def certified(self) -> bool:
        return self.status == "independent_to_bound"


def independence_check(stab: StabilizerData, alpha: Root, coeff_bound: int, *, max_tries: int = 3) -> IndependenceReport:
    """Exclude integer relations ``p alpha(w1) + q alpha(w2) = 0`` with
    ``0 < max(|p|,|q|) <= coeff_bound``.

    On success the smallest positive ``|p alpha(w1) + q alpha(w2)|`` is
    reported: the group ``alpha(Omega)`` has a point in ``(0, smallest.hi]``.
    """
    if stab.dim != 3 or stab.rank != 2:
        raise RefusedError("independence check needs d = 3 and a rank-2 stabilizer")
    alpha.check(3)
    eps = Fraction(1, 10 ** 40)
    for _ in range(max_tries):
        logs = [FlowVector(log_embedding(w, eps)) for w in stab.unit_elems]
        a1, a2 = alpha.value(logs[0]), alpha.value(logs[1])
        bad = []
        best = None
        for p in range(0, coeff_bound + 1):
            for q in range(-coeff_bound, coeff_bound + 1):
                if p == 0 and q <= 0:
                    continue
                v = abs(a1 * p + a2 * q)
                if v.lo <= 0:
                    bad.append((p, q))
                    continue
                if best is None or v.hi < best[0].hi:
                    best = (v, (p, q))
        if not bad:
            return IndependenceReport("independent_to_bound", coeff_bound, best[0], best[1])
        eps = eps * eps
    return IndependenceReport("inconclusive", coeff_bound, None if best is None else best[0],
                              None if best is None else best[1], tuple(bad))


# ---------------------------------------------------------------------------
# recurrence


@dataclass(frozen=True)
class RecurrencePoint:
    flow: FlowVector
    param: Fraction
    coefficients: tuple
    delta: RatInterval


def _sup(v) -> RatInterval:
    out = _ZERO
    for x in v:
        a = abs(as_interval(x))
        out = RatInterval(max(out.lo, a.lo), max(out.hi, a.hi))
    return out


def recurrence_sequence(
    stab: StabilizerData,
    direction: FlowVector,
    m,
    count: int,
    *,
    coeff_bound: int = 50,
    lattice_coeffs: tuple | None = None,
) -> list[RecurrencePoint]:
    """Points ``t`` on the ray ``a' + s*direction`` (``a' = (-m, 0, m)``) in the
    half-plane ``t_2 - t_3 <= -m``, each within sup-distance ``delta`` of the
    stabilizer lattice, with ``delta`` certified strictly decreasing.

    If ``lattice_coeffs`` is given the direction is the lattice vector with
    those coefficients and the exact returns ``n * direction`` (delta = 0)
    are listed instead.
    """
    if stab.dim != 3:
        raise RefusedError("recurrence sequences are defined for d = 3")
    if count <= 0:
        return []
    m = Q(m)
    out: list[RecurrencePoint] = []
    if lattice_coeffs is not None:
        vec = stab.omega_basis[0] * lattice_coeffs[0]
        for c, w in zip(lattice_coeffs[1:], stab.omega_basis[1:]):
            vec = vec + w * c
        slope = vec.coords[1] - vec.coords[2]
        if as_interval(slope).hi >= 0:
            raise ValueError("lattice direction never enters the half-plane")
        n = 1
        while len(out) < count:
            gap = as_interval(slope * n)
            if gap.hi <= -m:
                out.append(RecurrencePoint(vec * n, Fraction(n), tuple(c * n for c in lattice_coeffs), _ZERO))
            elif gap.lo <= -m:
                raise PrecisionError("half-plane membership undecided")
            n += 1
        return out
    if not direction.exact:
        raise ValueError("direction must be exact outside the periodic case")
    dvec = np.array([float(x) for x in direction.coords])
    if not np.any(dvec):
        raise ValueError("direction must be nonzero")
    a0 = (-m, Fraction(0), m)
    W = np.array([w.to_float() for w in stab.omega_basis])
    rng = range(-coeff_bound, coeff_bound + 1)
    cands = []
    # every point of the plane is within this sup distance of the lattice
    cover = 0.5 * float(np.sum(np.max(np.abs(W), axis=1)))
    dd = float(dvec @ dvec)
    base = np.array([float(x) for x in a0])
    for coeffs in itertools.product(rng, repeat=stab.rank):
        p = np.array(coeffs, dtype=float) @ W
        s = float((p - base) @ dvec) / dd
        if s < 0:
            continue
        dist = float(np.max(np.abs(base + s * dvec - p)))
        if dist > cover:
            continue
        cands.append((s, dist, coeffs))
    cands.sort()
    best = None
    for s, _, coeffs in cands:
        sq = Fraction(s).limit_denominator(10 ** 12)
        t = tuple(a + sq * x for a, x in zip(a0, direction.coords))
        if t[1] - t[2] > -m:
            continue
        w = tuple(sum((as_interval(om.coords[i]) * c for om, c in zip(stab.omega_basis, coeffs)), _ZERO) for i in range(3))
        delta = _sup([ti - wi for ti, wi in zip(t, w)])
        if best is None or delta.hi < best.lo:
            best = delta
            out.append(RecurrencePoint(FlowVector(t), sq, tuple(coeffs), delta))
            if len(out) == count:
                break
    return out


# ---------------------------------------------------------------------------
# exact factorizations


def factor_shrinking(p) -> tuple:
    """``p = u_23(t0) b1 b2`` for ``p = [[a,0,0],[b,g,dl],[e,tau,mu]]`` with tau, mu != 0."""
    p = tuple(tuple(Q(x) for x in row) for row in p)
    if len(p) != 3 or any(len(r) != 3 for r in p):
        raise PatternError("need a 3x3 matrix")
    if p[0][1] != 0 or p[0][2] != 0:
        raise PatternError("first row must be (a, 0, 0)")
    if la.det(p) != 1:
        raise NotUnimodularError(f"det = {la.det(p)} != 1", measured=la.det(p))
    (a, _, _), (b, g, dl), (e, tau, mu) = p
    if tau == 0 or mu == 0:
        raise PatternError("need tau != 0 and mu != 0")
    t0 = dl / mu
    b1 = (
        (a, Fraction(0), Fraction(0)),
        (b - dl * e / mu, g - dl * tau / mu, Fraction(0)),
        (e, Fraction(0), mu),
    )
    b2 = (
        (Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(1), Fraction(0)),
        (Fraction(0), tau / mu, Fraction(1)),
    )
    return t0, b1, b2


def elementary(d: int, i: int, j: int, s) -> tuple:
    m = [list(r) for r in la.identity(d)]
    m[i - 1][j - 1] = Q(s) if not isinstance(s, RatInterval) else s
    return la.to_matrix(m)


@dataclass(frozen=True)
class ConjugatorReport:
    matrix: tuple
    zero_entries: tuple  # first-row off-diagonal entries, each contains 0
    tau_nonzero: bool | None
    mu_nonzero: bool | None
    admissible: bool | None
    flags: tuple


def _decide_nonzero(x) -> bool | None:
    if isinstance(x, RatInterval):
        if x.excludes_zero():
            return True
        return False if x.is_point else None
    return x != 0


def solve_conjugator(g0, v, *, max_tries: int = 3) -> ConjugatorReport:
    """``p = g_v g0^-1`` with the admissibility pattern checked.

    ``v`` entries are rationals, intervals or refinable reals.
    """
    eps = hs.DEFAULT_EPS
    g0 = la.to_matrix(g0)
    for _ in range(max_tries):
        vv = [x if isinstance(x, (RatInterval, Fraction, int)) else x.enclosure(eps) for x in v]
        gv = elementary(3, 1, 2, vv[0])
        gv = la.matmul(gv, elementary(3, 1, 3, vv[1]))
        det = la.det(g0)
        if (isinstance(det, RatInterval) and det.contains(0)) or det == 0:
            raise ValueError("g0 is singular")
        p = la.matmul(gv, la.inverse(g0))
        zeros = (p[0][1], p[0][2])
        zero_ok = all((x.contains(0) if isinstance(x, RatInterval) else x == 0) for x in zeros)
        tau, mu = _decide_nonzero(p[2][1]), _decide_nonzero(p[2][2])
        if tau is not None and mu is not None:
            break
        eps = eps * eps
    flags = []
    if not zero_ok:
        flags.append("first row is not (a, 0, 0)")
    if tau is False:
        flags.append("tau = 0: not admissible")
    if mu is False:
        flags.append("mu = 0: not admissible")
    if tau is None or mu is None:
        flags.append("tau/mu undecided at available precision")
    admissible = zero_ok and tau is True and mu is True
    if tau is None or mu is None:
        admissible = None
    return ConjugatorReport(p, zeros, tau, mu, admissible, tuple(flags))


# ---------------------------------------------------------------------------
# orbit diagnostics


def lll_float(B: np.ndarray, delta: float = 0.75) -> np.ndarray:
    """LLL reduction of the columns of a float basis (small dimensions)."""
    B = np.array(B, dtype=float).T.copy()  # rows are vectors here
    n = len(B)

    def gso(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((n, n))
        for i in range(n):
            Bs[i] = B[i]
            for j in range(i):
                mu[i, j] = B[i] @ Bs[j] / (Bs[j] @ Bs[j])
                Bs[i] = Bs[i] - mu[i, j] * Bs[j]
        return Bs, mu

    Bs, mu = gso(B)
    k = 1
    guard = 0
    while k < n and guard < 10000:
        guard += 1
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[k] = B[k] - q * B[j]
                Bs, mu = gso(B)
        if Bs[k] @ Bs[k] >= (delta - mu[k, k - 1] ** 2) * (Bs[k - 1] @ Bs[k - 1]):
            k += 1
        else:
            B[[k, k - 1]] = B[[k - 1, k]]
            Bs, mu = gso(B)
            k = max(k - 1, 1)
    return B.T


def _canonical(B: np.ndarray) -> np.ndarray:
    R = lll_float(B)
    # sort columns by length, fix signs so the first nonzero entry is positive
    cols = sorted(R.T, key=lambda c: (round(float(np.max(np.abs(c))), 12), tuple(np.round(c, 12))))
    out = []
    for c in cols:
        nz = np.nonzero(np.abs(c) > 1e-12)[0]
        if len(nz) and c[nz[0]] < 0:
            c = -c
        out.append(c)
    return np.array(out).T


def shortest_sup(B: np.ndarray) -> float:
    """Shortest nonzero lattice vector in the sup norm (float enumeration)."""
    R = lll_float(B)
    L = float(np.min(np.max(np.abs(R), axis=0)))
    inv = np.linalg.inv(R)
    bounds = np.floor(np.abs(inv).sum(axis=1) * L + 1e-9).astype(int)
    ranges = [np.arange(-b, b + 1) for b in bounds]
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, len(bounds))
    mesh = mesh[np.any(mesh != 0, axis=1)]
    vals = np.max(np.abs(mesh @ R.T), axis=1)
    return float(min(L, vals.min())) if len(vals) else L


_UNIMODULAR: dict[int, np.ndarray] = {}


def _small_unimodular(d: int) -> np.ndarray:
    if d not in _UNIMODULAR:
        mats = np.array(list(itertools.product((-1, 0, 1), repeat=d * d)), dtype=float).reshape(-1, d, d)
        dets = np.round(np.linalg.det(mats))
        _UNIMODULAR[d] = mats[np.abs(dets) == 1]
    return _UNIMODULAR[d]


def lattice_distance(B1: np.ndarray, B2: np.ndarray) -> float:
    """min over unimodular U with entries in {-1,0,1} of ``|R1 U - R2|_max``
    on canonically reduced bases."""
    R1, R2 = _canonical(B1), _canonical(B2)
    Us = _small_unimodular(len(R1))
    diffs = np.einsum("ij,njk->nik", R1, Us) - R2
    return float(np.min(np.max(np.abs(diffs), axis=(1, 2))))


@dataclass(frozen=True)
class OrbitRow:
    flow: tuple
    shortest: float
    distances: tuple


def orbit_scan(x, flows: Sequence, targets: Sequence = (), *, workers: int = 1) -> list[OrbitRow]:
    """Shortest vector of ``a x`` and its distance to each target, per flow."""
    B = x.to_float() if hasattr(x, "to_float") else np.asarray(x, dtype=float)
    T = [t.to_float() if hasattr(t, "to_float") else np.asarray(t, dtype=float) for t in targets]

    def one(f):
        tv = f.to_float() if isinstance(f, FlowVector) else np.asarray(f, dtype=float)
        aB = np.exp(tv)[:, None] * B
        return OrbitRow(tuple(float(v) for v in tv), shortest_sup(aB), tuple(lattice_distance(aB, t) for t in T))

    flows = list(flows)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, flows))
    return [one(f) for f in flows]


def orbit_csv(rows: Sequence[OrbitRow], header: dict | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write("# " + " ".join(f"{k}={v}" for k, v in sorted(header.items())) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    d = len(rows[0].flow) if rows else 0
    nt = len(rows[0].distances) if rows else 0
    wr.writerow([f"t{i + 1}" for i in range(d)] + ["shortest"] + [f"dist_{k + 1}" for k in range(nt)])
    for r in rows:
        wr.writerow([repr(v) for v in r.flow] + [repr(r.shortest)] + [repr(v) for v in r.distances])
    return buf.getvalue()


def flow_grid(d: int, radius, steps: int) -> list[FlowVector]:
    """Uniform grid of trace-zero flows: the first d-1 coordinates range over
    ``steps`` rational values in ``[-radius, radius]``."""
    r = Fraction(str(radius)) if isinstance(radius, float) else Q(radius)
    if steps < 2:
        vals = [Fraction(0)]
    else:
        vals = [-r + 2 * r * k / (steps - 1) for k in range(steps)]
    out = []
    for head in itertools.product(vals, repeat=d - 1):
        out.append(FlowVector(tuple(head) + (-sum(head, Fraction(0)),)))
    return out
