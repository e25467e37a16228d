import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridprod.errors import FieldError
from gridprod.numberfield import (
    EmbeddedReal,
    dump_descriptor,
    embed,
    embedding_discriminant,
    find_units,
    geometric_embedding_matrix,
    load_descriptor,
    log_embedding,
    make_field,
    norm,
    norm_trace,
)

from conftest import CUBIC

EPS = Fraction(1, 10 ** 30)


def test_generator_norm_and_trace(cubic, golden):
    assert norm_trace(cubic.gen()) == (1, 0)
    assert norm(golden.gen()) == -1
    assert norm_trace(golden.gen())[1] == 1


def test_rejects_bad_polynomials():
    with pytest.raises(FieldError):
        make_field((1, 0, 1))  # no real roots
    with pytest.raises(FieldError):
        make_field((-2, 1, 1))  # root 1
    with pytest.raises(FieldError):
        make_field((1, 0, 0, 0, 1))
    with pytest.raises(FieldError):
        make_field((1, 2))  # degree 1, unsupported


def test_embeddings_are_ordered_roots(cubic):
    vals = [float(embed(cubic.gen(), i, EPS).mid) for i in (1, 2, 3)]
    assert vals == sorted(vals)
    assert abs(vals[0] + 1.5320888862379560) < 1e-15


def test_unit_search_rank_and_entry_sums(cubic_units):
    assert cubic_units.rank == 2
    assert len(cubic_units.independent) == 2
    for u in cubic_units.units:
        assert abs(norm(u)) == 1
    for s in cubic_units.entry_sums():
        assert s.contains(0)
        assert s.width < Fraction(1, 10 ** 10)


def test_golden_units(golden_units):
    assert golden_units.rank == 1
    assert any(u.coords == (0, 1) for u in golden_units.units)


def test_unit_search_is_worker_independent(cubic, cubic_units):
    assert find_units(cubic, 10, workers=4).units == cubic_units.units


def test_descriptor_roundtrip(cubic_units):
    text = dump_descriptor(cubic_units)
    back = load_descriptor(text)
    assert back.units == cubic_units.units
    assert back.rank == 2
    assert json.loads(text)["poly"] == list(CUBIC)


def test_descriptor_rejects_nonunit():
    data = {"poly": list(CUBIC), "units": [["2", "0", "0"]], "height": 1}
    with pytest.raises(FieldError):
        load_descriptor(data)


def test_embedding_matrix_determinant(cubic):
    basis = [cubic.one(), cubic.gen(), cubic.gen() ** 2]
    M, c = geometric_embedding_matrix(cubic, basis, EPS)
    from gridprod import _linalg as la

    assert (la.det(M) ** 2).contains(embedding_discriminant(cubic, basis))
    assert (abs(la.det(M)) * c ** 3).contains(1)


def test_log_embedding_sums_to_zero(cubic):
    lv = log_embedding(cubic.gen() + 1)
    assert sum(lv, lv[0] * 0).contains(0)


def test_embedded_real_float(golden):
    assert abs(float(EmbeddedReal(golden.gen(), 2)) - 1.618033988749895) < 1e-15


coords = st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=6), min_size=3, max_size=3)


@given(coords, coords)
def test_norm_multiplicative(cubic, a, b):
    x, y = cubic.element(a), cubic.element(b)
    assert norm(x * y) == norm(x) * norm(y)


@given(coords.filter(lambda c: any(c)))
def test_inverse(cubic, a):
    x = cubic.element(a)
    assert x * x.inverse() == cubic.one()


@given(coords, coords)
def test_embedding_is_ring_homomorphism(cubic, a, b):
    x, y = cubic.element(a), cubic.element(b)
    for i in (1, 2, 3):
        lhs, rhs = embed(x, i, EPS) * embed(y, i, EPS), embed(x * y, i, EPS)
        assert lhs.lo <= rhs.hi and rhs.lo <= lhs.hi
