#!/usr/bin/env python3
"""Benchmark the numba kernels against the vectorized numpy fallbacks.

The two hot loops are the O(K^2) pairwise coefficient accumulation and the
O(n^2) Kendall pair count. This script times both implementations directly
(no dispatch, no subprocesses) and prints a small table.

Usage: python3 benchmarks/kernel_benchmark.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from faitheval import _kernels

if not _kernels.NUMBA_ENABLED:
    raise SystemExit(
        "numba path is disabled (FAITHEVAL_NO_NUMBA set or numba missing); "
        "nothing to compare"
    )


def bench(fn, args, repeats):
    fn(*args)  # warm-up: triggers JIT compilation for the numba variants
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = []

    for k in (10, 100, 1000, 5000):
        s = np.sort(rng.normal(size=k))[::-1].copy()
        dpred = rng.normal(size=k)
        t_nb = bench(_kernels._pair_sums_nb, (s, dpred), args.repeats)
        t_np = bench(_kernels._pair_sums_np, (s, dpred), args.repeats)
        assert np.allclose(_kernels._pair_sums_nb(s, dpred), _kernels._pair_sums_np(s, dpred))
        rows.append(("pair_sums", k, t_nb, t_np))

    for n in (10, 100, 1000, 5000):
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        t_nb = bench(_kernels._kendall_counts_nb, (a, b), args.repeats)
        t_np = bench(_kernels._kendall_counts_np, (a, b), args.repeats)
        assert _kernels._kendall_counts_nb(a, b) == _kernels._kendall_counts_np(a, b)
        rows.append(("kendall_counts", n, t_nb, t_np))

    print(f"{'kernel':<16}{'size':>6}{'numba (ms)':>14}{'numpy (ms)':>14}{'speedup':>10}")
    for name, size, t_nb, t_np in rows:
        print(
            f"{name:<16}{size:>6}{t_nb * 1e3:>14.4f}{t_np * 1e3:>14.4f}"
            f"{t_np / t_nb:>10.2f}x"
        )


if __name__ == "__main__":
    main()
