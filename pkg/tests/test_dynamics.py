from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridprod import _linalg as la
from gridprod import dynamics as dyn
from gridprod import homspace as hs
from gridprod.algebraic import RatInterval
from gridprod.errors import (
    NotRegularError,
    NotUnimodularError,
    OpenCellError,
    PatternError,
    RefusedError,
)
from gridprod.numberfield import EmbeddedReal

F = Fraction


# -- value types ------------------------------------------------------------


def test_flow_vector_trace_zero():
    dyn.FlowVector((1, -2, 1))
    with pytest.raises(ValueError):
        dyn.FlowVector((1, 1, 1))
    dyn.FlowVector((RatInterval(F(-1, 10**9), F(1, 10**9)), 0))


def test_roots():
    assert len(dyn.all_roots(3)) == 9
    assert len(dyn.all_roots(3, singles=False)) == 6
    assert dyn.Root.pair(1, 3).value((2, -1, -1)) == 3
    assert dyn.Root.single(2).value((2, -1, -1)) == -1
    with pytest.raises(ValueError):
        dyn.Root.pair(2, 2)
    with pytest.raises(ValueError):
        dyn.Root.single(4).check(3)


def test_affine_map_requires_det_one():
    with pytest.raises(NotUnimodularError):
        dyn.AffineMap([[2, 0], [0, 1]], [0, 0])
    g = dyn.AffineMap([[1, 2], [0, 1]], [F(1, 2), 0])
    assert (g @ g.inverse()) == dyn.AffineMap.identity(2)


def test_flow_exp_log():
    a = (F(4), F(1, 2), F(1, 2))
    t = dyn.flow("log", a)
    back = dyn.flow("exp", t)
    for x, y in zip(back, a):
        assert x.contains(y)
    assert dyn.flow("exp", dyn.FlowVector((0, 0, 0))) == (1, 1, 1)
    with pytest.raises(NotUnimodularError):
        dyn.flow("log", (2, 2, 2))
    assert dyn.flow("root_value", (dyn.Root.pair(1, 2), (3, -1, -2))) == 4


# -- conjugation ------------------------------------------------------------


def test_conjugation_examples():
    a = (F(4), F(1, 2), F(1, 2))
    c = dyn.conjugate_unipotent(a, dyn.Root.pair(1, 2), 3)
    assert c.scaled == 24 and c.identity_holds
    c = dyn.conjugate_unipotent(a, dyn.Root.single(1), F(1, 4))
    assert c.scaled == 1 and c.identity_holds


diag_entry = st.sampled_from([F(4), F(2), F(1), F(1, 2), F(1, 4), F(3), F(1, 3)])
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@given(diag_entry, diag_entry, st.sampled_from(dyn.all_roots(3)), rationals)
def test_conjugation_identity_exact(a1, a2, alpha, t):
    a = (a1, a2, 1 / (a1 * a2))
    c = dyn.conjugate_unipotent(a, alpha, t)
    assert c.identity_holds is True
    assert c.scaled == alpha.character(a) * t


# -- horospherical split ----------------------------------------------------


def _det1(rows):
    m = [list(r) for r in rows]
    for i in range(3):
        m[i][i] += 30  # diagonally dominant keeps all principal minors nonzero
    det = la.det(m)
    m[0] = [x / det for x in m[0]]
    return la.to_matrix(m)


matrices = st.lists(st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=7), min_size=3, max_size=3),
                    min_size=3, max_size=3)
regular = st.sampled_from([(F(4), F(2), F(1, 8)), (F(1, 8), F(4), F(2)), (F(3), F(1, 6), F(2))])


@given(matrices, st.lists(rationals, min_size=3, max_size=3), regular)
def test_horospherical_reconstruction(rows, shift, b):
    g = dyn.AffineMap(_det1(rows), shift)
    c, up, um = dyn.horospherical_split(g, b)
    assert c @ up @ um == g
    assert dyn.in_horospherical(up, b, +1)
    assert dyn.in_horospherical(um, b, -1)
    assert all(c.linear[i][j] == 0 for i in range(3) for j in range(3) if i != j)
    assert dyn.horospherical_split(g, b) == (c, up, um)


def test_horospherical_contraction():
    b = (F(4), F(2), F(1, 8))
    g = dyn.AffineMap(_det1([[1, 2, 3], [4, 5, 6], [7, 8, 9]]), [1, 2, 3])
    _, up, um = dyn.horospherical_split(g, b)
    B = dyn.diagonal_map(b)
    conj = um
    for _ in range(40):
        conj = B @ conj @ B.inverse()
    dev = max(abs(float(conj.linear[i][j]) - (i == j)) for i in range(3) for j in range(3))
    dev = max([dev] + [abs(float(x)) for x in conj.shift])
    assert dev < 1e-10


def test_linear_split_allows_unit_entry():
    b = (F(4), F(1), F(1, 4))
    g = dyn.AffineMap.linear_map(_det1([[1, 2, 3], [4, 5, 6], [7, 8, 9]]))
    c, up, um = dyn.horospherical_split(g, b)
    assert c @ up @ um == g
    with pytest.raises(NotRegularError):
        dyn.horospherical_split(dyn.AffineMap(g.linear, (1, 1, 1)), b)


def test_split_errors():
    with pytest.raises(NotRegularError):
        dyn.horospherical_split(dyn.AffineMap.identity(3), (F(2), F(2), F(1, 4)))
    perm = dyn.AffineMap.linear_map([[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
    with pytest.raises(OpenCellError):
        dyn.horospherical_split(perm, (F(1, 4), F(1, 2), F(8)))


# -- compact orbits ---------------------------------------------------------


def test_stabilizer_golden(golden, golden_units):
    K = golden
    x0, stab = dyn.compact_orbit_lattice(K, [K.one(), K.gen()], golden_units)
    assert stab.rank == 1
    chk = stab.verification[0]
    assert chk.exact == ((1, 1), (1, 2))
    assert chk.contains and chk.max_width < F(1, 10 ** 8)


def test_stabilizer_cubic(cubic, cubic_units):
    K = cubic
    x0, stab = dyn.compact_orbit_lattice(K, [K.one(), K.gen(), K.gen() ** 2], cubic_units)
    assert stab.rank == 2
    for chk in stab.verification:
        assert chk.contains and chk.max_width < F(1, 10 ** 8)
        assert all(x.denominator == 1 for row in chk.exact for x in row)
        assert abs(la.det(chk.exact)) == 1
    assert abs(float(stab.index_note.mid) - 6.79) < 0.01


def test_independence_cubic(cubic, cubic_units):
    K = cubic
    _, stab = dyn.compact_orbit_lattice(K, [K.one(), K.gen(), K.gen() ** 2], cubic_units)
    rep = dyn.independence_check(stab, dyn.Root.pair(1, 2), 30)
    assert rep.status == "independent_to_bound"
    assert rep.smallest.lo > 0


def test_independence_refused(golden, golden_units):
    K = golden
    _, stab = dyn.compact_orbit_lattice(K, [K.one(), K.gen()], golden_units)
    with pytest.raises(RefusedError):
        dyn.independence_check(stab, dyn.Root.pair(1, 2), 5)


def test_recurrence_sequence(cubic, cubic_units):
    K = cubic
    _, stab = dyn.compact_orbit_lattice(K, [K.one(), K.gen(), K.gen() ** 2], cubic_units)
    pts = dyn.recurrence_sequence(stab, dyn.FlowVector((2, -1, -1)), 1, 4, coeff_bound=30)
    assert len(pts) == 4
    for p, q in zip(pts, pts[1:]):
        assert q.delta.hi < p.delta.lo
        assert q.param > p.param
    for p in pts:
        assert p.flow.coords[1] - p.flow.coords[2] <= -1
    periodic = dyn.recurrence_sequence(stab, None, 1, 3, lattice_coeffs=(1, 0))
    assert [p.param for p in periodic] == [1, 2, 3]
    assert all(p.delta.hi == 0 for p in periodic)
    with pytest.raises(ValueError):
        dyn.recurrence_sequence(stab, None, 1, 1, lattice_coeffs=(-1, 0))


# -- factorizations ---------------------------------------------------------


def test_factor_shrinking_example():
    p = ((2, 0, 0), (1, 1, 1), (3, 1, F(3, 2)))
    t0, b1, b2 = dyn.factor_shrinking(p)
    assert la.matmul(la.matmul(dyn.elementary(3, 2, 3, t0), b1), b2) == la.to_matrix(p)
    assert b1[1][2] == 0 and b1[2][1] == 0


def test_factor_shrinking_pattern_errors():
    with pytest.raises(PatternError):
        dyn.factor_shrinking(((1, 1, 0), (0, 1, 0), (0, 0, 1)))
    with pytest.raises(PatternError):
        dyn.factor_shrinking(((1, 0, 0), (0, 0, 1), (0, -1, 0)))
    with pytest.raises(NotUnimodularError):
        dyn.factor_shrinking(((2, 0, 0), (0, 1, 0), (0, 1, 1)))


nonzero = st.fractions(min_value=-9, max_value=9, max_denominator=9).filter(lambda x: x != 0)


@given(nonzero.filter(lambda x: x > 0), nonzero, nonzero, rationals, rationals, rationals)
def test_factor_shrinking_reconstruction(a, tau, mu, dl, b, e):
    g = (1 / a + dl * tau) / mu
    p = ((a, 0, 0), (b, g, dl), (e, tau, mu))
    t0, b1, b2 = dyn.factor_shrinking(p)
    assert la.matmul(la.matmul(dyn.elementary(3, 2, 3, t0), b1), b2) == la.to_matrix(p)


def test_solve_conjugator_cubic(cubic, cubic_units):
    K = cubic
    x0, _ = dyn.compact_orbit_lattice(K, [K.one(), K.gen(), K.gen() ** 2], cubic_units)
    v = (EmbeddedReal(K.gen(), 1), EmbeddedReal(K.gen() ** 2, 1))
    rep = dyn.solve_conjugator(x0.basis, v)
    assert rep.admissible is True
    assert all(z.contains(0) for z in rep.zero_entries)


# -- root group line identity ----------------------------------------------


nz = st.fractions(min_value=-20, max_value=20, max_denominator=9).filter(lambda x: x != 0)


@given(st.lists(nz, min_size=3, max_size=3), rationals, st.permutations([1, 2, 3]))
def test_root_line_identity(w, t, perm):
    i, j = perm[0], perm[1]
    u = dyn.root_element(dyn.Root.pair(i, j), t, 3)
    lhs = hs.product_value(u(w))
    rhs = hs.product_value(w) * (w[j - 1] / w[i - 1] * t + 1)
    assert lhs == rhs


# -- orbit diagnostics ------------------------------------------------------


def test_lll_and_shortest():
    B = np.array([[1.0, 0.0], [100.0, 1.0]]).T
    assert dyn.shortest_sup(B) == pytest.approx(1.0)
    assert dyn.lattice_distance(np.eye(2), B) == pytest.approx(0.0, abs=1e-12)


def test_orbit_scan_deterministic():
    flows = dyn.flow_grid(3, 1.0, 3)
    assert len(flows) == 9
    x = hs.integer_lattice(3)
    r1 = dyn.orbit_scan(x, flows, [x])
    r4 = dyn.orbit_scan(x, flows, [x], workers=4)
    assert dyn.orbit_csv(r1) == dyn.orbit_csv(r4)
    zero = [r for r in r1 if not any(r.flow)][0]
    assert zero.shortest == 1.0 and zero.distances[0] == pytest.approx(0.0, abs=1e-12)


def test_small_perturbation_contracts_within_twenty_steps():
    b = (F(4), F(1), F(1, 4))
    m = [[1 + F(1, 50), F(-1, 40), F(1, 30)], [F(1, 20), F(1), F(-1, 60)], [F(0), F(1, 70), 1 + F(1, 90)]]
    det = la.det(m)
    m[0] = [x / det for x in m[0]]
    g = dyn.AffineMap.linear_map(m)
    c, up, um = dyn.horospherical_split(g, b)
    assert c @ up @ um == g
    B = dyn.diagonal_map(b)
    conj = um
    for _ in range(20):
        conj = B @ conj @ B.inverse()
    assert max(abs(float(conj.linear[i][j])) for i in range(3) for j in range(3) if i != j) < 1e-6


def test_non_regular_lists_vanishing_roots():
    with pytest.raises(NotRegularError) as exc:
        dyn.horospherical_split(dyn.AffineMap.identity(3), (F(4), F(1, 2), F(1, 2)))
    assert {str(r) for r in exc.value.roots} == {"pair(2,3)", "pair(3,2)"}
