"""Benchmark the compiled lower-hull kernel against the pure-Python fallback.

The hull kernel sits inside every elementary-curve solve, so this is the one
hot spot worth compiling; the event loop is interaction-dominated and stays
in Python.  Run:  python benchmarks/bench_envelope.py
"""

import time

import numpy as np

from ftbalance import _envelope_fallback

try:
    from ftbalance import _envelope_kernel
except ImportError:
    _envelope_kernel = None


def bench(fn, x, y, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(x, y)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(7)
    print(f"{'n':>7} {'pure (us)':>12} {'cython (us)':>12} {'speedup':>8}")
    for n in (64, 256, 1024, 4096, 16384):
        x = np.cumsum(rng.uniform(0.5, 1.5, n))
        y = np.cumsum(rng.normal(size=n))  # random walk: realistic hull sizes
        repeats = max(3, 20000 // n)
        t_pure = bench(_envelope_fallback.lower_hull_envelope, x, y, repeats)
        if _envelope_kernel is None:
            print(f"{n:>7} {t_pure * 1e6:>12.1f} {'missing':>12} {'-':>8}")
            continue
        xc, yc = np.ascontiguousarray(x), np.ascontiguousarray(y)
        t_cy = bench(_envelope_kernel.lower_hull_envelope, xc, yc, repeats)
        print(f"{n:>7} {t_pure * 1e6:>12.1f} {t_cy * 1e6:>12.1f} "
              f"{t_pure / t_cy:>7.1f}x")

        e1, h1 = _envelope_fallback.lower_hull_envelope(x, y)
        e2, h2 = _envelope_kernel.lower_hull_envelope(xc, yc)
        assert list(h1) == list(h2) and all(a == b for a, b in zip(e1, e2)), \
            "backends disagree"


if __name__ == "__main__":
    main()
