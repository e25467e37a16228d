"""Exact real-algebraic substrate.

Integer polynomials, Sturm-sequence root isolation and rational interval
arithmetic.  Every interval endpoint here is a :class:`fractions.Fraction`;
binary floating point only appears when a caller asks for ``float(...)``.
"""

from __future__ import annotations

import contextlib
import functools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from mpmath import iv
from mpmath.libmp import to_rational

from .errors import NotSquarefreeError, PrecisionError

Rational = Union[int, Fraction]


def Q(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(x)


# ---------------------------------------------------------------------------
# rational intervals


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Q(self.lo))
        object.__setattr__(self, "hi", Q(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "RatInterval":
        x = Q(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, RatInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    __contains__ = contains

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def excludes_zero(self) -> bool:
        return not self.contains_zero()

    def sign(self) -> int:
        """Certified sign; raises :class:`PrecisionError` if undecided."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        raise PrecisionError(f"sign of {self!r} is undecided")

    def hull(self, other: "RatInterval") -> "RatInterval":
        other = as_interval(other)
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "RatInterval") -> "RatInterval":
        other = as_interval(other)
        return RatInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __add__(self, other):
        other = as_interval(other)
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        other = as_interval(other)
        return RatInterval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other >= 0:
                return RatInterval(self.lo * other, self.hi * other)
            return RatInterval(self.hi * other, self.lo * other)
        other = as_interval(other)
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RatInterval(min(p), max(p))

    __rmul__ = __mul__

    def inverse(self) -> "RatInterval":
        if self.contains_zero():
            raise PrecisionError(f"cannot invert {self!r}: contains 0")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Q(other))
        return self * as_interval(other).inverse()

    def __rtruediv__(self, other):
        return as_interval(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        if k % 2 == 1 or self.lo >= 0:
            lo, hi = self.lo ** k, self.hi ** k
            return RatInterval(min(lo, hi), max(lo, hi))
        if self.hi <= 0:
            return RatInterval(self.hi ** k, self.lo ** k)
        return RatInterval(0, max(self.lo ** k, self.hi ** k))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval(0, max(-self.lo, self.hi))

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"RatInterval({float(self.lo)!r}, {float(self.hi)!r}; w={float(self.width):.3g})"


def as_interval(x) -> RatInterval:
    if isinstance(x, RatInterval):
        return x
    return RatInterval.point(x)


def imax(xs: Iterable[RatInterval]) -> RatInterval:
    xs = [as_interval(x) for x in xs]
    return RatInterval(max(x.lo for x in xs), max(x.hi for x in xs))


def imin(xs: Iterable[RatInterval]) -> RatInterval:
    xs = [as_interval(x) for x in xs]
    return RatInterval(min(x.lo for x in xs), min(x.hi for x in xs))


# transcendental enclosures; mpmath's interval context rounds outward

_IV_PREC = 256
_IV_LOCK = threading.Lock()


@contextlib.contextmanager
def _ivprec(prec: int):
    # mpmath's interval context has a single global precision
    with _IV_LOCK:
        saved = iv.prec
        iv.prec = prec
        try:
            yield
        finally:
            iv.prec = saved


def _from_iv(y) -> RatInterval:
    a, b = y._mpi_
    pa, qa = to_rational(a)
    pb, qb = to_rational(b)
    return RatInterval(Fraction(int(pa), int(qa)), Fraction(int(pb), int(qb)))


def _to_iv(x: RatInterval):
    lo = iv.mpf(x.lo.numerator) / iv.mpf(x.lo.denominator)
    hi = iv.mpf(x.hi.numerator) / iv.mpf(x.hi.denominator)
    return iv.mpf([lo.a, hi.b])


def log_interval(x, prec: int = _IV_PREC) -> RatInterval:
    """Enclosure of ``log`` over a positive rational interval."""
    x = as_interval(x)
    if x.lo <= 0:
        raise PrecisionError(f"log of {x!r}: not certainly positive")
    with _ivprec(prec):
        return _from_iv(iv.log(_to_iv(x)))


def exp_interval(x, prec: int = _IV_PREC) -> RatInterval:
    x = as_interval(x)
    with _ivprec(prec):
        return _from_iv(iv.exp(_to_iv(x)))


def _iroot_floor(n: int, k: int) -> int:
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def root_interval(x, k: int, bits: int = 200) -> RatInterval:
    """Enclosure of the positive ``k``-th root over a nonnegative interval."""
    x = as_interval(x)
    if x.lo < 0:
        raise PrecisionError(f"{k}-th root of {x!r}: not certainly nonnegative")
    scale = 1 << bits

    def lower(q: Fraction) -> Fraction:
        return Fraction(_iroot_floor((q.numerator * scale ** k) // q.denominator, k), scale)

    def upper(q: Fraction) -> Fraction:
        n = -((-q.numerator * scale ** k) // q.denominator)
        r = _iroot_floor(n, k)
        if r ** k < n:
            r += 1
        return Fraction(r, scale)

    return RatInterval(lower(x.lo), upper(x.hi))


def sqrt_interval(x, bits: int = 200) -> RatInterval:
    return root_interval(x, 2, bits)


# ---------------------------------------------------------------------------
# polynomials (coefficient tuples, ascending degree)


def poly_trim(p: Sequence) -> tuple:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_degree(p: Sequence) -> int:
    return len(poly_trim(p)) - 1


def poly_add(p, q) -> tuple:
    n = max(len(p), len(q))
    return poly_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def poly_scale(p, c) -> tuple:
    return poly_trim([c * a for a in p])


def poly_mul(p, q) -> tuple:
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return poly_trim(out)


def poly_derivative(p) -> tuple:
    return poly_trim([i * p[i] for i in range(1, len(p))])


def poly_divmod(p, q) -> tuple[tuple, tuple]:
    p = [Q(a) for a in poly_trim(p)]
    q = [Q(a) for a in poly_trim(q)]
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    dq = len(q) - 1
    quot = [Fraction(0)] * max(len(p) - dq, 1)
    while len(p) - 1 >= dq and p:
        c = p[-1] / q[-1]
        k = len(p) - 1 - dq
        quot[k] = c
        for i in range(len(q)):
            p[k + i] -= c * q[i]
        p = list(poly_trim(p))
    return poly_trim(quot), tuple(p)


def poly_gcd(p, q) -> tuple:
    """Monic gcd over the rationals."""
    p, q = poly_trim(p), poly_trim(q)
    while q:
        _, r = poly_divmod(p, q)
        p, q = q, r
    if not p:
        return ()
    lc = Q(p[-1])
    return tuple(Q(a) / lc for a in p)


def poly_eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def resultant(p, q) -> Fraction:
    """Resultant via the Sylvester determinant (exact)."""
    from ._linalg import det

    p, q = poly_trim(p), poly_trim(q)
    m, n = len(p) - 1, len(q) - 1
    if m < 0 or n < 0:
        return Fraction(0)
    if m == 0 and n == 0:
        return Fraction(1)
    size = m + n
    rows = []
    for i in range(n):
        row = [0] * size
        for j, c in enumerate(reversed(p)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [0] * size
        for j, c in enumerate(reversed(q)):
            row[i + j] = c
        rows.append(row)
    return Q(det(rows))


def discriminant(p) -> Fraction:
    p = poly_trim(p)
    d = len(p) - 1
    sign = -1 if (d * (d - 1) // 2) % 2 else 1
    return sign * resultant(p, poly_derivative(p)) / Q(p[-1])


@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial, coefficients in ascending degree order."""

    coeffs: tuple

    def __post_init__(self):
        if any(isinstance(a, float) or int(a) != a for a in self.coeffs):
            raise ValueError("coefficients must be integers")
        c = tuple(int(a) for a in self.coeffs)
        if not c or c[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return poly_eval(self.coeffs, x)

    def derivative(self) -> tuple:
        return poly_derivative(self.coeffs)

    def is_squarefree(self) -> bool:
        return len(poly_gcd(self.coeffs, self.derivative())) <= 1

    def __str__(self):
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c:
                terms.append(f"{c}*x^{i}" if i else str(c))
        return " + ".join(terms)


# ---------------------------------------------------------------------------
# Sturm sequences and real roots


def sturm_sequence(p) -> list[tuple]:
    p = tuple(Q(a) for a in poly_trim(p))
    seq = [p, poly_derivative(p)]
    while poly_degree(seq[-1]) > 0:
        _, r = poly_divmod(seq[-2], seq[-1])
        if not r:
            break
        seq.append(poly_scale(r, -1))
    return seq


def _variations(signs: Iterable[int]) -> int:
    signs = [s for s in signs if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sign_variations(seq, x) -> int:
    """Sign changes of a Sturm sequence at ``x`` (``x`` may be +-inf)."""
    if x == math.inf or x == -math.inf:
        out = []
        for s in seq:
            s = poly_trim(s)
            if not s:
                continue
            lead = _sign(s[-1])
            if x < 0 and (len(s) - 1) % 2:
                lead = -lead
            out.append(lead)
        return _variations(out)
    return _variations(_sign(poly_eval(s, x)) for s in seq)


def count_real_roots(p, lo=-math.inf, hi=math.inf) -> int:
    """Distinct real roots in ``(lo, hi]`` of a squarefree polynomial."""
    seq = sturm_sequence(p)
    return sign_variations(seq, lo) - sign_variations(seq, hi)


@dataclass(frozen=True)
class RealRoot:
    """The unique root of ``poly`` inside ``interval``."""

    poly: IntPoly
    interval: RatInterval

    def __float__(self):
        return float(refine_root(self, Fraction(1, 1 << 60)).interval.mid)

    def enclosure(self, eps) -> RatInterval:
        return refine_root(self, eps).interval


def _cauchy_bound(p) -> Fraction:
    lc = abs(Q(p[-1]))
    return 1 + max(abs(Q(c)) / lc for c in p[:-1])


def isolate_roots(p) -> list[RealRoot]:
    """Isolating intervals for all real roots of a squarefree polynomial."""
    if not isinstance(p, IntPoly):
        p = IntPoly(tuple(p))
    if p.degree < 1:
        return []
    if not p.is_squarefree():
        raise NotSquarefreeError(f"{p} is not squarefree")
    seq = sturm_sequence(p.coeffs)
    M = _cauchy_bound(p.coeffs)
    out: list[RealRoot] = []
    stack = [(-M, M, sign_variations(seq, -M), sign_variations(seq, M))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        n = vlo - vhi
        if n == 0:
            continue
        if n == 1:
            if p(hi) == 0:
                out.append(RealRoot(p, RatInterval.point(hi)))
            else:
                out.append(RealRoot(p, RatInterval(lo, hi)))
            continue
        mid = (lo + hi) / 2
        if p(mid) == 0:
            # split around an exact rational root so no endpoint is a root
            out.append(RealRoot(p, RatInterval.point(mid)))
            delta = (hi - lo) / 4
            while p(mid - delta) == 0 or p(mid + delta) == 0 or (
                sign_variations(seq, mid - delta) - sign_variations(seq, mid + delta) != 1
            ):
                delta /= 2
            a, b = mid - delta, mid + delta
            stack.append((lo, a, vlo, sign_variations(seq, a)))
            stack.append((b, hi, sign_variations(seq, b), vhi))
            continue
        vmid = sign_variations(seq, mid)
        stack.append((lo, mid, vlo, vmid))
        stack.append((mid, hi, vmid, vhi))
    out.sort(key=lambda r: (r.interval.lo, r.interval.hi))
    return out


@functools.lru_cache(maxsize=4096)
def _refine(r: RealRoot, eps: Fraction) -> RealRoot:
    p = r.poly
    lo, hi = r.interval.lo, r.interval.hi
    if hi - lo <= eps:
        return r
    flo = p(lo)
    if flo == 0:
        return RealRoot(p, RatInterval.point(lo))
    if p(hi) == 0:
        return RealRoot(p, RatInterval.point(hi))
    slo = _sign(flo)
    while hi - lo > eps:
        mid = (lo + hi) / 2
        fm = p(mid)
        if fm == 0:
            return RealRoot(p, RatInterval.point(mid))
        if _sign(fm) == slo:
            lo = mid
        else:
            hi = mid
    return RealRoot(p, RatInterval(lo, hi))


def refine_root(r: RealRoot, eps) -> RealRoot:
    """Bisect ``r`` until its interval has width at most ``eps``."""
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return _refine(r, eps)


def eval_interval(p: Sequence, x) -> RatInterval:
    """Horner evaluation over an interval; the result encloses p(x)."""
    x = as_interval(x)
    if x.is_point():
        return RatInterval.point(poly_eval([Q(c) for c in p], x.lo))
    acc = RatInterval.point(0)
    for c in reversed(poly_trim(p)):
        acc = acc * x + Q(c)
    return acc
