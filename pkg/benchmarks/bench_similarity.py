#!/usr/bin/env python3
"""Benchmark the pairwise-similarity kernels: numba @njit vs pure numpy.

Generates synthetic corpora shaped like the real one (13 scalar criteria,
a handful of categorical blocks) and times the raw-matrix computation on
both backends. The first numba call compiles; it is reported separately.

Usage:
    python benchmarks/bench_similarity.py [--sizes 50,100,200,400] [--repeats 5]
"""

import argparse
import time

import numpy as np

from studyatlas.similarity.kernels import NUMBA_AVAILABLE, pairwise_raw


def synthetic_arrays(n, n_scalar=13, n_cat=8, vocab_per_cat=12, na_rate=0.1, seed=0):
    rng = np.random.default_rng(seed)
    scalars = rng.random((n, n_scalar))
    scalars[rng.random((n, n_scalar)) < na_rate] = np.nan
    bounds = np.arange(n_cat + 1, dtype=np.int64) * vocab_per_cat
    cat = (rng.random((n, int(bounds[-1]))) < 0.25).astype(np.float64)
    cards = np.stack(
        [cat[:, bounds[c]:bounds[c + 1]].sum(axis=1) for c in range(n_cat)], axis=1)
    return scalars, cat, bounds, cards


def bench(backend, arrays, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        pairwise_raw(*arrays, backend=backend)
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="50,100,200,400")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = ["numpy"]
    if NUMBA_AVAILABLE:
        small = synthetic_arrays(8)
        start = time.perf_counter()
        pairwise_raw(*small, backend="numba")
        print(f"numba first call (compile + run): {time.perf_counter() - start:.3f}s")
        backends.append("numba")
    else:
        print("numba not importable; benchmarking numpy only")

    header = f"{'records':>8s}" + "".join(f"{b:>12s}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for n in sizes:
        arrays = synthetic_arrays(n)
        row = [f"{n:>8d}"]
        results = {}
        for backend in backends:
            results[backend] = bench(backend, arrays, args.repeats)
            row.append(f"{results[backend] * 1e3:>10.2f}ms")
        if len(backends) == 2:
            row.append(f"{results['numpy'] / results['numba']:>9.1f}x")
        print("".join(row))

    a = pairwise_raw(*synthetic_arrays(60), backend="numpy")
    if NUMBA_AVAILABLE:
        b = pairwise_raw(*synthetic_arrays(60), backend="numba")
        print(f"\nbackend agreement (n=60): max |numpy - numba| = {np.abs(a - b).max():.3e}")


if __name__ == "__main__":
    main()
