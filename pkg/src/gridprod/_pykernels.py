"""Pure numpy fallback for the scan kernels.

Fractional parts are 64-bit fixed point: a real ``x`` is stored as
``floor(frac(x) * 2**64)`` and ``n*x - g mod 1`` is evaluated with wrapping
uint64 arithmetic, which is exact modulo 2**64.  Results must match the
compiled kernels bit for bit, so the float operation order below is fixed:
``value = weight; value *= dist_i * 2**-64`` for each factor in turn.
"""

from __future__ import annotations

import math

import numpy as np

TWO_M64 = 2.0 ** -64
_HALF = np.uint64(1 << 63)


def _dist(x: np.ndarray) -> np.ndarray:
    # distance to the nearest integer, as uint64 fixed point
    neg = (np.uint64(0) - x).astype(np.uint64)
    return np.where(x >= _HALF, neg, x)


def _times(n: np.ndarray, a: int) -> np.ndarray:
    return (n.astype(np.uint64) * np.uint64(a)).astype(np.uint64)


def scan_products_chunk(A, G, h2: int, n0: int, n1: int):
    """Prefix-minimum records of ``|n + h| * prod dist(n*A_i - G_i)`` for ``n0 <= |n| < n1``.

    Both signs of ``n`` are visited, ``+n`` first; ``n = 0`` once.  ``h = h2/2``.
    Returns a list of ``(signed_n, value)``.
    """
    if n1 <= n0:
        return []
    n = np.arange(n0, n1, dtype=np.int64)
    vals = []
    for sign in (1, -1):
        nn = n * sign
        w = (2.0 * n.astype(np.float64) + sign * h2) * 0.5
        v = w.copy()
        for a, g in zip(A, G):
            x = (_times(nn, a) - np.uint64(g)).astype(np.uint64)
            v = v * (_dist(x).astype(np.float64) * TWO_M64)
        vals.append(v)
    # interleave +n, -n
    inter = np.empty(2 * len(n), dtype=np.float64)
    inter[0::2] = vals[0]
    inter[1::2] = vals[1]
    signed = np.empty(2 * len(n), dtype=np.int64)
    signed[0::2] = n
    signed[1::2] = -n
    if n0 == 0:
        inter = inter[np.arange(len(inter)) != 1]
        signed = signed[np.arange(len(signed)) != 1]
    # prefix minima in a vectorized pass, then keep strict improvements
    pm = np.minimum.accumulate(inter)
    prev = np.concatenate(([np.inf], pm[:-1]))
    idx = np.nonzero(inter < prev)[0]
    return [(int(signed[i]), float(inter[i])) for i in idx]


def scan_linear_chunk(A: int, B: int, G: int, P0: int, P1: int):
    """Records of ``|nm| * dist(n*A + m*B - G)`` ordered by ``P = |nm|`` in ``[P0, P1)``.

    Ties inside one ``P`` are broken by ``(value, n, m)``.  Returns a list of
    ``(P, n, m, value)``.
    """
    if P1 <= P0:
        return []
    P0 = max(P0, 1)
    size = P1 - P0
    bv = np.full(size, np.inf)
    bn = np.zeros(size, dtype=np.int64)
    bm = np.zeros(size, dtype=np.int64)

    def update(n, m):
        # within one call every P is distinct, so a masked assignment is safe
        P = np.abs(n * m)
        idx = P - P0
        base = (_times(n, A) + _times(m, B)).astype(np.uint64)
        w = P.astype(np.float64)
        for sgn in (1, -1):
            if sgn == 1:
                x = (base - np.uint64(G)).astype(np.uint64)
            else:
                x = (np.uint64(0) - base - np.uint64(G)).astype(np.uint64)
            v = w * (_dist(x).astype(np.float64) * TWO_M64)
            sn, sm = n * sgn, m * sgn
            cv, cn, cm = bv[idx], bn[idx], bm[idx]
            better = (v < cv) | ((v == cv) & ((sn < cn) | ((sn == cn) & (sm < cm))))
            j = idx[better]
            bv[j] = v[better]
            bn[j] = sn[better]
            bm[j] = sm[better]

    S = math.isqrt(P1 - 1)
    for n in range(1, S + 1):
        mlo = -(-P0 // n)
        mhi = (P1 - 1) // n
        if mhi < mlo:
            continue
        mpos = np.arange(mlo, mhi + 1, dtype=np.int64)
        nn = np.full(len(mpos), n, dtype=np.int64)
        update(nn, mpos)
        update(nn, -mpos)
    for mm in range(1, (P1 - 1) // (S + 1) + 1):
        nlo = max(S + 1, -(-P0 // mm))
        nhi = (P1 - 1) // mm
        if nhi < nlo:
            continue
        n = np.arange(nlo, nhi + 1, dtype=np.int64)
        for m in (mm, -mm):
            update(n, np.full(len(n), m, dtype=np.int64))
    pm = np.minimum.accumulate(bv)
    prev = np.concatenate(([np.inf], pm[:-1]))
    idx = np.nonzero(bv < prev)[0]
    return [(int(P0 + i), int(bn[i]), int(bm[i]), float(bv[i])) for i in idx]


def grid_min_int(Bint, k: int, j, box, Rint: int):
    """Min ``|prod_i w_i|`` over ``w = Bint (k n + j)`` with ``|w_i| <= Rint``.

    ``n`` ranges over the integer box; ties go to the lexicographically first
    ``n``.  Returns ``(prod, n)`` or ``None`` when the box has no points.
    """
    d = len(Bint)
    ranges = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in box]
    if any(len(r) == 0 for r in ranges):
        return None
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
    coeff = mesh * k + np.asarray(j, dtype=np.int64)
    W = coeff @ np.asarray(Bint, dtype=np.int64).T
    inside = np.all(np.abs(W) <= Rint, axis=1)
    if not inside.any():
        return None
    W = W[inside]
    mesh = mesh[inside]
    prods = np.abs(np.prod(W, axis=1))
    i = int(np.argmin(prods))
    return int(prods[i]), tuple(int(x) for x in mesh[i])
