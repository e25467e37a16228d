from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridprod.algebraic import (
    IntPoly,
    RatInterval,
    count_real_roots,
    discriminant,
    isolate_roots,
    poly_divmod,
    poly_mul,
    poly_add,
    refine_root,
    resultant,
)
from gridprod.errors import NotSquarefreeError, PrecisionError

EPS30 = Fraction(1, 10 ** 30)


def test_cubic_roots_match_trig_closed_form():
    roots = isolate_roots((-1, -3, 0, 1))
    assert len(roots) == 3
    mpmath.mp.dps = 50
    expected = sorted(2 * mpmath.cos(k * mpmath.pi / 9) for k in (1, 5, 7))
    for r, e in zip(roots, expected):
        iv = r.enclosure(EPS30)
        assert iv.width <= EPS30
        ref = Fraction(mpmath.nstr(e, 48))
        slack = Fraction(1, 10 ** 45)
        assert iv.lo - slack <= ref <= iv.hi + slack


def test_golden_roots():
    lo, hi = isolate_roots((-1, -1, 1))
    assert abs(float(hi) - (1 + 5 ** 0.5) / 2) < 1e-15
    assert abs(float(lo) - (1 - 5 ** 0.5) / 2) < 1e-15


def test_discriminants_and_resultant():
    assert discriminant((-1, -3, 0, 1)) == 81
    assert discriminant((-1, -1, 1)) == 5
    # Res(x^2 - 2, x - 1) = f(1)
    assert abs(resultant((-2, 0, 1), (-1, 1))) == 1


def test_sturm_counts():
    assert count_real_roots((-1, -3, 0, 1)) == 3
    assert count_real_roots((1, 0, 1)) == 0
    assert count_real_roots((-1, -3, 0, 1), 0, 2) == 1


def test_not_squarefree_rejected():
    with pytest.raises(NotSquarefreeError):
        isolate_roots((1, -2, 1))


def test_refine_narrows():
    r = isolate_roots((-2, 0, 1))[1]
    r2 = refine_root(r, Fraction(1, 10 ** 40))
    assert r2.interval.width <= Fraction(1, 10 ** 40)
    assert r2.interval.lo ** 2 < 2 < r2.interval.hi ** 2


def test_interval_inverse_of_zero_interval():
    with pytest.raises(PrecisionError):
        RatInterval(-1, 1).inverse()


def test_intpoly_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        IntPoly((1, 0))
    with pytest.raises(ValueError):
        IntPoly((1.5, 1))


fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40)


@st.composite
def intervals_with_point(draw):
    a, b, t = draw(fractions), draw(fractions), draw(st.fractions(min_value=0, max_value=1, max_denominator=20))
    lo, hi = min(a, b), max(a, b)
    return RatInterval(lo, hi), lo + t * (hi - lo)


@given(intervals_with_point(), intervals_with_point())
def test_interval_ops_enclose_pointwise(xa, yb):
    (X, x), (Y, y) = xa, yb
    assert (X + Y).contains(x + y)
    assert (X - Y).contains(x - y)
    assert (X * Y).contains(x * y)
    assert abs(X).contains(abs(x))
    assert (X ** 3).contains(x ** 3)
    if not Y.contains_zero():
        assert (X / Y).contains(x / y)


polys = st.lists(st.integers(-9, 9), min_size=1, max_size=5).filter(lambda c: c[-1] != 0)


@given(polys, polys)
def test_divmod_reconstructs(p, q):
    quo, rem = poly_divmod(p, q)
    back = poly_add(poly_mul(quo, q), rem)
    assert tuple(Fraction(c) for c in back) == tuple(Fraction(c) for c in p)
    assert len(rem) < len(q) or all(c == 0 for c in rem)


@given(st.lists(st.integers(-6, 6), min_size=1, max_size=3, unique=True))
def test_isolation_of_products_of_linear_factors(rs):
    p = (1,)
    for r in rs:
        p = poly_mul(p, (-r, 1))
    roots = isolate_roots(tuple(int(c) for c in p))
    assert len(roots) == len(rs)
    for root, r in zip(roots, sorted(rs)):
        assert root.enclosure(Fraction(1, 10 ** 6)).contains(r)
