"""Time the numba kernels against their numpy / pure-python fallbacks.

Usage: python benchmarks/bench_kernels.py [--n 2000] [--repeat 3]

The first numba call (compilation) is excluded. Setting
``SCD_DISABLE_NUMBA=1`` makes the library use the fallback column.
"""

import argparse
import time

import numpy as np

from scd import kernels
from scd.lfr import LfrParams, generate_lfr


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def csr(g):
    deg = g.degrees
    dinv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return (g.indptr.astype(np.int64), g.indices.astype(np.int64),
            np.asarray(g.data, dtype=np.float64), dinv)


def cases(n, rng):
    X = rng.normal(size=(n, 32))
    C = rng.normal(size=(50, 32))
    labels = rng.integers(0, 50, n).astype(np.int64)
    counts = np.bincount(labels, minlength=50).astype(np.int64)
    yield "assign", n, (lambda f: f(X, C)), kernels._assign_numba, kernels._assign_numpy

    yield ("silhouette_ab", n, (lambda f: f(X, labels, counts)),
           kernels._silhouette_ab_numba, kernels._silhouette_ab_numpy)

    g, _ = generate_lfr(LfrParams(n=n, avg_deg=15, max_deg=50, mixing=0.3, seed=0))
    indptr, indices, weights, dinv = csr(g)
    sources = np.arange(min(n, 500), dtype=np.int64)
    yield ("ppr_rows", len(sources), (lambda f: f(indptr, indices, weights, dinv, sources, 0.85, 1e-6, 1000)),
           kernels._ppr_rows_numba, kernels._ppr_rows_numpy)

    order = rng.permutation(n).astype(np.int64)
    draws = rng.random(n)

    def lpa(f):
        f(indptr, indices, weights, np.arange(n, dtype=np.int64), order, draws,
          np.full(n, -1.0), np.zeros(n, dtype=np.int64))
    yield "lpa_pass", n, lpa, kernels._lpa_pass_numba, kernels._lpa_pass_py

    deg = g.degrees.astype(np.float64)

    def louvain(f):
        f(indptr, indices, weights, deg, np.arange(n, dtype=np.int64), deg.copy(),
          np.ones(n, dtype=np.int64), order, float(deg.sum()), np.zeros(n, dtype=np.int64),
          np.zeros(1, dtype=np.int64), np.full(n, -1.0), np.zeros(n, dtype=np.int64))
    yield "louvain_move", n, louvain, kernels._louvain_move_numba, kernels._louvain_move_py

    hl = np.arange(n, dtype=np.int64) % 50
    hc = np.array([X[hl == c].mean(axis=0) for c in range(50)])
    hn = np.bincount(hl, minlength=50).astype(np.float64)
    yield ("hartigan_pass", n, (lambda f: f(X, hl.copy(), hc.copy(), hn.copy())),
           kernels._hartigan_pass_numba, kernels._hartigan_pass_py)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'size':>7}{'numba s':>11}{'fallback s':>12}{'speedup':>9}")
    for name, size, call, fast, slow in cases(args.n, rng):
        call(fast)
        t_fast = best_time(lambda: call(fast), args.repeat)
        t_slow = best_time(lambda: call(slow), args.repeat)
        print(f"{name:<15}{size:>7}{t_fast:>11.4f}{t_slow:>12.4f}{t_slow / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
