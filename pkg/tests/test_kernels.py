import importlib
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridprod import _pykernels, kernels

TWO64 = 1 << 64
TWO_M64 = 2.0 ** -64

try:
    compiled = kernels.backend("compiled")
except ImportError:  # extension not built
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _dist(x):
    x %= TWO64
    return x if x < (1 << 63) else TWO64 - x


def brute_products(A, G, N, h2=0):
    out, best = [], float("inf")
    for n in range(1, N + 1):
        for sn in (n, -n):
            v = (2.0 * n + (h2 if sn > 0 else -h2)) * 0.5
            for a, g in zip(A, G):
                v *= _dist(sn * a - g) * TWO_M64
            if v < best:
                best = v
                out.append((sn, v))
    return out


def brute_linear(A, B, G, N):
    best_at = {}
    for n in range(1, N + 1):
        for m in range(1, N // n + 1):
            P = n * m
            for sm in (m, -m):
                for sn, smm in ((n, sm), (-n, -sm)):
                    v = float(P) * (_dist(sn * A + smm * B - G) * TWO_M64)
                    key = (v, sn, smm)
                    if P not in best_at or key < best_at[P]:
                        best_at[P] = key
    out, best = [], float("inf")
    for P in sorted(best_at):
        v, n, m = best_at[P]
        if v < best:
            best = v
            out.append((P, n, m, v))
    return out


words = st.integers(0, TWO64 - 1)


@given(st.lists(words, min_size=1, max_size=3), st.data())
def test_python_products_match_brute_force(A, data):
    G = data.draw(st.lists(words, min_size=len(A), max_size=len(A)))
    h2 = data.draw(st.sampled_from([0, 1]))
    assert kernels.product_records(A, G, 300, h2=h2, impl=_pykernels) == brute_products(A, G, 300, h2)


@given(words, words, words)
def test_python_linear_matches_brute_force(A, B, G):
    assert kernels.linear_records(A, B, G, 400, impl=_pykernels) == brute_linear(A, B, G, 400)


@needs_compiled
@given(st.lists(words, min_size=1, max_size=3), st.data())
def test_backends_agree_products(A, data):
    G = data.draw(st.lists(words, min_size=len(A), max_size=len(A)))
    h2 = data.draw(st.sampled_from([0, 1]))
    N = data.draw(st.integers(1, 5000))
    assert kernels.product_records(A, G, N, h2=h2, impl=compiled) == kernels.product_records(A, G, N, h2=h2, impl=_pykernels)


@needs_compiled
@given(words, words, words, st.integers(1, 3000))
def test_backends_agree_linear(A, B, G, N):
    assert kernels.linear_records(A, B, G, N, impl=compiled) == kernels.linear_records(A, B, G, N, impl=_pykernels)


@needs_compiled
def test_backends_agree_across_chunks():
    rng = random.Random(5)
    A = [rng.getrandbits(64) for _ in range(2)]
    G = [rng.getrandbits(64) for _ in range(2)]
    N = 3 * kernels.PRODUCT_CHUNK + 17
    assert kernels.product_records(A, G, N, impl=compiled) == kernels.product_records(A, G, N, impl=_pykernels)
    N = 2 * kernels.LINEAR_CHUNK + 5
    assert kernels.linear_records(A[0], A[1], G[0], N, impl=compiled) == kernels.linear_records(A[0], A[1], G[0], N, impl=_pykernels)


def test_workers_do_not_change_records():
    rng = random.Random(7)
    A = [rng.getrandbits(64) for _ in range(2)]
    G = [rng.getrandbits(64) for _ in range(2)]
    N = 5 * kernels.PRODUCT_CHUNK
    one = kernels.product_records(A, G, N, workers=1)
    assert kernels.product_records(A, G, N, workers=8) == one
    assert kernels.linear_records(A[0], A[1], G[0], N, workers=8) == kernels.linear_records(A[0], A[1], G[0], N)


def test_zero_included_once_when_start_is_zero():
    recs = kernels.product_records([1 << 62], [1 << 61], 3, h2=1, start=0)
    assert recs[0][0] == 0
    assert [r[0] for r in recs].count(0) == 1


@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=3, max_size=3),
       st.integers(1, 4), st.lists(st.integers(0, 3), min_size=3, max_size=3), st.integers(1, 40))
def test_grid_min_int_matches_bigint(B, k, j, R):
    box = [(-3, 3)] * 3
    assert kernels.grid_min_int(B, k, j, box, R) == kernels._grid_min_bigint(B, k, j, box, R)


def test_backend_env_override(monkeypatch):
    monkeypatch.setenv("GRIDPROD_BACKEND", "python")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("GRIDPROD_BACKEND")
        importlib.reload(kernels)
    with pytest.raises(ValueError):
        kernels.backend("fortran")
