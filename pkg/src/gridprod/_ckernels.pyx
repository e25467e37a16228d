# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernels; see _pykernels.py for the reference semantics."""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cdef double TWO_M64 = 5.421010862427522e-20  # 2**-64

cdef inline uint64_t _dist(uint64_t x) nogil:
    if x >> 63:
        return (<uint64_t>0) - x
    return x


def scan_products_chunk(A, G, int h2, int64_t n0, int64_t n1):
    cdef int k = len(A)
    cdef uint64_t a[8]
    cdef uint64_t g[8]
    cdef int i, s
    if k > 8:
        raise ValueError("at most 8 factors")
    for i in range(k):
        a[i] = <uint64_t>A[i]
        g[i] = <uint64_t>G[i]
    cdef int64_t n, sn
    cdef double best = INFINITY
    cdef double v, w
    cdef uint64_t x
    cdef int64_t cap = 1024
    cdef int64_t cnt = 0
    cdef int64_t* rn = <int64_t*>malloc(cap * sizeof(int64_t))
    cdef double* rv = <double*>malloc(cap * sizeof(double))
    cdef int64_t* tmpn
    cdef double* tmpv
    out = []
    try:
        with nogil:
            n = n0
            while n < n1:
                for s in range(2):
                    if s == 1 and n == 0:
                        break
                    if s == 0:
                        sn = n
                        w = (2.0 * <double>n + h2) * 0.5
                    else:
                        sn = -n
                        w = (2.0 * <double>n - h2) * 0.5
                    v = w
                    for i in range(k):
                        x = (<uint64_t>sn) * a[i] - g[i]
                        v = v * (<double>_dist(x) * TWO_M64)
                    if v < best:
                        best = v
                        if cnt == cap:
                            cap *= 2
                            tmpn = <int64_t*>malloc(cap * sizeof(int64_t))
                            tmpv = <double*>malloc(cap * sizeof(double))
                            for i in range(cnt):
                                tmpn[i] = rn[i]
                                tmpv[i] = rv[i]
                            free(rn)
                            free(rv)
                            rn = tmpn
                            rv = tmpv
                        rn[cnt] = sn
                        rv[cnt] = v
                        cnt += 1
                n += 1
        for i in range(cnt):
            out.append((rn[i], rv[i]))
    finally:
        free(rn)
        free(rv)
    return out


def scan_linear_chunk(uint64_t A, uint64_t B, uint64_t G, int64_t P0, int64_t P1):
    if P1 <= P0:
        return []
    if P0 < 1:
        P0 = 1
    cdef int64_t size = P1 - P0
    cdef double* bv = <double*>malloc(size * sizeof(double))
    cdef int64_t* bn = <int64_t*>malloc(size * sizeof(int64_t))
    cdef int64_t* bm = <int64_t*>malloc(size * sizeof(int64_t))
    cdef int64_t n, m, mlo, mhi, P, idx, sn, sm, mm
    cdef int s, t
    cdef uint64_t base, x
    cdef double v, best
    out = []
    try:
        with nogil:
            for idx in range(size):
                bv[idx] = INFINITY
                bn[idx] = 0
                bm[idx] = 0
            n = 1
            while n < P1:
                mlo = (P0 + n - 1) // n
                mhi = (P1 - 1) // n
                mm = mlo
                while mm <= mhi:
                    for t in range(2):
                        m = mm if t == 0 else -mm
                        P = n * mm
                        idx = P - P0
                        base = (<uint64_t>n) * A + (<uint64_t>m) * B
                        for s in range(2):
                            if s == 0:
                                x = base - G
                                sn = n
                                sm = m
                            else:
                                x = (<uint64_t>0) - base - G
                                sn = -n
                                sm = -m
                            v = <double>P * (<double>_dist(x) * TWO_M64)
                            if v < bv[idx] or (v == bv[idx] and (sn < bn[idx] or (sn == bn[idx] and sm < bm[idx]))):
                                bv[idx] = v
                                bn[idx] = sn
                                bm[idx] = sm
                    mm += 1
                n += 1
        best = INFINITY
        for idx in range(size):
            if bv[idx] < best:
                best = bv[idx]
                out.append((P0 + idx, bn[idx], bm[idx], bv[idx]))
    finally:
        free(bv)
        free(bn)
        free(bm)
    return out


def grid_min_int(Bint, int64_t k, j, box, int64_t Rint):
    cdef int d = len(Bint)
    if d < 1 or d > 3:
        raise ValueError("grid_min_int supports d <= 3")
    cdef int64_t b[3][3]
    cdef int64_t jj[3]
    cdef int64_t lo[3]
    cdef int64_t hi[3]
    cdef int r, c
    for r in range(3):
        jj[r] = 0
        lo[r] = 0
        hi[r] = 0
        for c in range(3):
            b[r][c] = 0
    for r in range(d):
        jj[r] = j[r]
        lo[r] = box[r][0]
        hi[r] = box[r][1]
        for c in range(d):
            b[r][c] = Bint[r][c]
    cdef int64_t n0, n1, n2, w, prod, best = -1
    cdef int64_t bn0 = 0, bn1 = 0, bn2 = 0
    cdef int64_t coef[3]
    cdef bint ok
    with nogil:
        n0 = lo[0]
        while n0 <= hi[0]:
            n1 = lo[1]
            while n1 <= hi[1]:
                n2 = lo[2]
                while n2 <= hi[2]:
                    coef[0] = k * n0 + jj[0]
                    coef[1] = k * n1 + jj[1]
                    coef[2] = k * n2 + jj[2]
                    ok = True
                    prod = 1
                    for r in range(d):
                        w = 0
                        for c in range(d):
                            w = w + b[r][c] * coef[c]
                        if w > Rint or w < -Rint:
                            ok = False
                            break
                        prod = prod * w
                    if ok:
                        if prod < 0:
                            prod = -prod
                        if best < 0 or prod < best:
                            best = prod
                            bn0 = n0
                            bn1 = n1
                            bn2 = n2
                    n2 += 1
                n1 += 1
            n0 += 1
    if best < 0:
        return None
    return best, (bn0, bn1, bn2)[:d]
