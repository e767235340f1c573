#!/usr/bin/env python3
"""Time the jit-compiled kernels against their vectorized numpy references.

Run after installing the package:

    python benchmarks/bench_kernels.py [--repeats N]

Each kernel is warmed once before timing so numba compilation does not
land in the measurement. The numbers are medians over the repeats.
Setting WIKIHOAX_NO_NUMBA=1 makes both columns run the numpy path,
which is a quick way to sanity-check dispatch overhead.
"""

import argparse
import statistics
import time

import numpy as np

from wikihoax import accel


def _median_time(fn, args, repeats):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def _row(name, args, repeats):
    fast = getattr(accel, name)
    ref = getattr(accel, f"{name}_numpy")
    fast(*args)  # warm (jit compile on first call)
    ref(*args)
    t_fast = _median_time(fast, args, repeats)
    t_ref = _median_time(ref, args, repeats)
    speedup = t_ref / t_fast if t_fast > 0 else float("inf")
    print(f"{name:<16} {t_fast * 1e3:>10.3f} ms {t_ref * 1e3:>10.3f} ms "
          f"{speedup:>7.2f}x")


def _kde_args(rng):
    events = np.sort(rng.uniform(0.0, 2000.0, size=4000))
    grid = np.linspace(-10.0, 2010.0, 512)
    return events, grid, 12.5


def _bocpd_args(rng):
    counts = np.concatenate([
        rng.poisson(2.0, 300), rng.poisson(15.0, 300), rng.poisson(4.0, 300),
    ]).astype(np.float64)
    return counts, 0.01, 1.0, 1.0


def _svm_args(rng):
    n, dim, nnz_per_row, epochs = 2000, 600, 24, 30
    indptr = np.arange(0, (n + 1) * nnz_per_row, nnz_per_row, dtype=np.int64)
    indices = np.concatenate([
        rng.choice(dim, size=nnz_per_row, replace=False) for _ in range(n)
    ]).astype(np.int64)
    data = rng.normal(size=n * nnz_per_row)
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    cw = np.ones(n)
    order = np.stack([rng.permutation(n) for _ in range(epochs)]).astype(np.int64)
    return indptr, indices, data, y, cw, order, 1.0 / n, dim


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7,
                        help="timed runs per kernel (median reported)")
    args = parser.parse_args()

    rng = np.random.default_rng(42)
    mode = "numba jit" if accel.USING_NUMBA else "numpy fallback"
    print(f"dispatch: {mode}\n")
    print(f"{'kernel':<16} {'dispatched':>13} {'numpy ref':>13} {'speedup':>8}")
    _row("kde_gaussian", _kde_args(rng), args.repeats)
    _row("bocpd_modes", _bocpd_args(rng), args.repeats)
    _row("svm_epochs", _svm_args(rng), args.repeats)


if __name__ == "__main__":
    main()
