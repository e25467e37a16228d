"""Small dense linear algebra over Fractions and rational intervals.

Matrices are tuples of row tuples.  Exact matrices use Gaussian elimination;
interval matrices use cofactor expansion, which avoids pivoting on entries
whose sign is undecided (fine for the d <= 4 sizes used here).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from .algebraic import RatInterval, Q

Matrix = tuple


def is_interval_matrix(m) -> bool:
    return any(isinstance(x, RatInterval) for row in m for x in row)


def to_matrix(rows) -> Matrix:
    return tuple(tuple(r) for r in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def transpose(m) -> Matrix:
    return tuple(zip(*m))


def matmul(a, b) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(_dot(row, col) for col in bt) for row in a)


def matvec(a, v) -> tuple:
    return tuple(_dot(row, v) for row in a)


def _dot(u, v):
    acc = 0
    for x, y in zip(u, v):
        acc = acc + x * y
    return acc


def _det_exact(m) -> Fraction:
    a = [[Q(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _det_cofactor(m):
    n = len(m)
    acc = 0
    for p in permutations(range(n)):
        term = _perm_sign(p)
        for i in range(n):
            term = term * m[i][p[i]]
        acc = acc + term
    return acc


def det(m):
    if len(m) == 0:
        return Fraction(1)
    if is_interval_matrix(m):
        return _det_cofactor(m)
    return _det_exact(m)


def minor(m, i, j) -> Matrix:
    return tuple(tuple(x for c, x in enumerate(row) if c != j) for r, row in enumerate(m) if r != i)


def adjugate(m) -> Matrix:
    n = len(m)
    if n == 1:
        return ((Fraction(1),),)
    return tuple(
        tuple(((-1) ** (i + j)) * det(minor(m, j, i)) for j in range(n)) for i in range(n)
    )


def inverse(m) -> Matrix:
    """Exact inverse, or an interval enclosure via the adjugate formula."""
    if is_interval_matrix(m):
        d = det(m)
        if d.contains_zero():
            from .errors import PrecisionError

            raise PrecisionError("interval determinant contains 0")
        inv_d = d.inverse()
        return tuple(tuple(x * inv_d for x in row) for row in adjugate(m))
    a = [[Q(x) for x in row] + [Fraction(int(i == j)) for j in range(len(m))] for i, row in enumerate(m)]
    n = len(m)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return tuple(tuple(row[n:]) for row in a)


def scale(m, c) -> Matrix:
    return tuple(tuple(x * c for x in row) for row in m)


def sub(a, b) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def diag(entries) -> Matrix:
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else Fraction(0) for j in range(n)) for i in range(n))


def to_float(m):
    import numpy as np

    return np.array([[float(x) for x in row] for row in m], dtype=float)
