"""Compare the compiled scan kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--N 1000000] [--repeat 3]

Both backends must return identical records; the script checks that before
printing timings.
"""

import argparse
import random
import time

from gridprod import kernels


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    words = [rng.getrandbits(64) for _ in range(5)]
    cases = {
        "products (2 factors)": lambda impl: kernels.product_records(words[:2], words[2:4], args.N, impl=impl),
        "linear form": lambda impl: kernels.linear_records(words[0], words[1], words[2], args.N, impl=impl),
    }
    try:
        compiled = kernels.backend("compiled")
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the numpy fallback only")
    python = kernels.backend("python")

    print(f"{'kernel':<22}{'N':>10}{'compiled s':>12}{'python s':>12}{'speedup':>9}")
    for name, fn in cases.items():
        tp, rp = _time(lambda: fn(python), args.repeat)
        if compiled is None:
            print(f"{name:<22}{args.N:>10}{'-':>12}{tp:>12.3f}{'-':>9}")
            continue
        tc, rc = _time(lambda: fn(compiled), args.repeat)
        if rc != rp:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<22}{args.N:>10}{tc:>12.3f}{tp:>12.3f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
