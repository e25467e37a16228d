"""Quick exact self-checks, run by ``gridprod check``.

Each check returns ``(name, passed, detail)``.  All arithmetic is over exact
rationals, so a failure is a bug rather than a precision issue.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from . import _linalg as la
from . import dynamics as dyn
from . import homspace as hs
from .numberfield import make_field, norm

_DIAG = (Fraction(4), Fraction(2), Fraction(1), Fraction(1, 2), Fraction(1, 4))


def check_conjugation():
    bad = 0
    total = 0
    for a1, a2 in itertools.product(_DIAG, repeat=2):
        a = (a1, a2, 1 / (a1 * a2))
        for alpha in dyn.all_roots(3):
            for t in (-3, 1, 7):
                total += 1
                if not dyn.conjugate_unipotent(a, alpha, t).identity_holds:
                    bad += 1
    return "conjugation identity", bad == 0, f"{total - bad}/{total}"


def _random_det1(rng: random.Random, d: int, spread: int = 5, den: int = 37):
    while True:
        m = [[Fraction(int(i == j)) + Fraction(rng.randint(-spread, spread), den) for j in range(d)] for i in range(d)]
        det = la.det(m)
        if det != 0:
            m[0] = [x / det for x in m[0]]
            return la.to_matrix(m)


def check_factor_shrinking(rng: random.Random, n: int = 50):
    ok = 0
    for _ in range(n):
        a = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        mu = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        tau = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        dl = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        b = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        e = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        # choose g so that det = a (g mu - dl tau) = 1
        g = (1 / a + dl * tau) / mu
        p = ((a, 0, 0), (b, g, dl), (e, tau, mu))
        t0, b1, b2 = dyn.factor_shrinking(p)
        prod = la.matmul(la.matmul(dyn.elementary(3, 2, 3, t0), b1), b2)
        ok += prod == la.to_matrix(tuple(tuple(Fraction(x) for x in r) for r in p))
    return "factor_shrinking reconstruction", ok == n, f"{ok}/{n}"


def check_horospherical(rng: random.Random, n: int = 100):
    ok = 0
    b = (Fraction(4), Fraction(2), Fraction(1, 8))
    for _ in range(n):
        g = dyn.AffineMap(_random_det1(rng, 3), [Fraction(rng.randint(-5, 5), 7) for _ in range(3)])
        c, up, um = dyn.horospherical_split(g, b)
        c2, up2, um2 = dyn.horospherical_split(g, b)
        ok += (c @ up @ um) == g and (c, up, um) == (c2, up2, um2)
    return "horospherical reconstruction", ok == n, f"{ok}/{n}"


def check_dual(rng: random.Random, n: int = 20):
    ok = 0
    for _ in range(n):
        x = hs.from_matrix(_random_det1(rng, 3))
        ok += hs.dual(hs.dual(x)).basis == x.basis
    return "dual involution", ok == n, f"{ok}/{n}"


def check_root_line(rng: random.Random, n: int = 30):
    ok = 0
    total = 0
    for _ in range(n):
        w = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 9)) for _ in range(3)]
        t = Fraction(rng.randint(-20, 20), rng.randint(1, 9))
        for i, j in itertools.permutations(range(3), 2):
            total += 1
            u = dyn.root_element(dyn.Root.pair(i + 1, j + 1), t, 3)
            lhs = hs.product_value(u(w))
            rhs = hs.product_value(w) * (w[j] / w[i] * t + 1)
            ok += lhs == rhs
    return "root-group line identity", ok == total, f"{ok}/{total}"


def check_norm_multiplicative(rng: random.Random, n: int = 50):
    K = make_field([-1, -3, 0, 1])
    ok = 0
    for _ in range(n):
        a = K.element([Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)])
        b = K.element([Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)])
        ok += norm(a * b) == norm(a) * norm(b)
    return "norm multiplicativity", ok == n, f"{ok}/{n}"


def check_mu_separable():
    v3 = hs.mu_estimate(hs.integer_lattice(3), "sample", k=2, R=1).value
    v2 = hs.mu_estimate(hs.integer_lattice(2), "sample", k=2, R=1).value
    return "separable mu estimates", (v3, v2) == (Fraction(1, 8), Fraction(1, 4)), f"Z3={v3} Z2={v2}"


def run_all(seed: int = 0) -> list[tuple]:
    rng = random.Random(seed)
    return [
        check_conjugation(),
        check_factor_shrinking(rng),
        check_horospherical(rng),
        check_dual(rng),
        check_root_line(rng),
        check_norm_multiplicative(rng),
        check_mu_separable(),
    ]
