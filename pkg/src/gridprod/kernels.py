"""Backend selection for the scan kernels.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementation in ``_pykernels``.  Set ``GRIDPROD_BACKEND=python`` to
force the fallback.  Both produce identical records.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("GRIDPROD_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels

PRODUCT_CHUNK = 1 << 16
LINEAR_CHUNK = 1 << 16


def backend(name: str | None = None):
    """Return the kernel module for ``name`` ("compiled"/"python"/None = active)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def _map(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _merge(chunks, value_index: int):
    out = []
    best = math.inf
    for recs in chunks:
        for r in recs:
            if r[value_index] < best:
                best = r[value_index]
                out.append(r)
    return out


def product_records(A, G, N: int, *, h2: int = 0, start: int = 1, workers: int = 1, impl=None):
    """Global prefix-minimum records over ``start <= |n| <= N``.

    The range is cut into fixed-size chunks, so the result does not depend on
    ``workers``.
    """
    impl = impl or _impl
    bounds = [(lo, min(lo + PRODUCT_CHUNK, N + 1)) for lo in range(start, N + 1, PRODUCT_CHUNK)]
    A = [int(a) for a in A]
    G = [int(g) for g in G]
    chunks = _map(lambda b: impl.scan_products_chunk(A, G, h2, b[0], b[1]), bounds, workers)
    return _merge(chunks, 1)


def linear_records(A: int, B: int, G: int, N: int, *, workers: int = 1, impl=None):
    """Global records of ``|nm| dist(nA + mB - G)`` ordered by ``|nm| <= N``."""
    impl = impl or _impl
    bounds = [(lo, min(lo + LINEAR_CHUNK, N + 1)) for lo in range(1, N + 1, LINEAR_CHUNK)]
    chunks = _map(lambda b: impl.scan_linear_chunk(int(A), int(B), int(G), b[0], b[1]), bounds, workers)
    return _merge(chunks, 3)


def grid_min_int(Bint, k: int, j, box, Rint: int):
    """Exact grid minimum kernel; Python ints are used when int64 could overflow."""
    d = len(Bint)
    span = max(max(abs(lo), abs(hi)) for lo, hi in box) if box else 0
    row = max(sum(abs(x) for x in r) for r in Bint)
    worst = row * (k * (span + 1) + k)
    if d <= 3 and max(worst, Rint) ** d < 2 ** 62:
        return _impl.grid_min_int(Bint, k, j, box, Rint)
    return _grid_min_bigint(Bint, k, j, box, Rint)


def _grid_min_bigint(Bint, k, j, box, Rint):
    import itertools

    best = None
    d = len(Bint)
    for n in itertools.product(*(range(lo, hi + 1) for lo, hi in box)):
        coef = [k * a + b for a, b in zip(n, j)]
        w = [sum(Bint[r][c] * coef[c] for c in range(d)) for r in range(d)]
        if max(abs(x) for x in w) > Rint:
            continue
        p = abs(math.prod(w))
        if best is None or p < best[0]:
            best = (p, tuple(n))
    return best
