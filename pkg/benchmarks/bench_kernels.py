"""Benchmark of the sampling hot loop: compiled backend vs plain numpy.

Times the per-spectrum theta-average of |P|^{2 beta} for a batch of sampled
spectra, which dominates the Monte Carlo pipeline runtime.  Run with

    python benchmarks/bench_kernels.py [--samples 20000] [--n 6] [--beta 2]
"""

import argparse
import time

import numpy as np

from cpmom import _kernels
from cpmom.core import Family, GroupSpec
from cpmom.haar import RngStream, sample_eigenangles_batch
from cpmom.montecarlo import min_inner_grid


def bench(fn, phis, beta, grid, repeats=5):
    fn(phis[:64], beta, grid)  # warm-up (compilation, cache effects)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(phis, beta, grid)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--samples", type=int, default=20000)
    parser.add_argument("--n", type=int, default=6)
    parser.add_argument("--beta", type=int, default=2)
    args = parser.parse_args()

    spec = GroupSpec(Family.SYMPLECTIC, args.n)
    grid = min_inner_grid(args.n, args.beta)
    phis = sample_eigenangles_batch(spec, RngStream(1), args.samples)
    print(
        "samples=%d N=%d beta=%d grid=%d"
        % (args.samples, args.n, args.beta, grid)
    )

    t_np = bench(_kernels.inner_moments_numpy, phis, args.beta, grid)
    rate = args.samples / t_np
    print("numpy : %8.3f ms  (%.0f spectra/s)" % (1e3 * t_np, rate))

    if _kernels.inner_moments_numba is None:
        print("numba : not installed")
        return

    t_nb = bench(_kernels.inner_moments_numba, phis, args.beta, grid)
    print(
        "numba : %8.3f ms  (%.0f spectra/s, %.1fx vs numpy)"
        % (1e3 * t_nb, args.samples / t_nb, t_np / t_nb)
    )

    a = _kernels.inner_moments_numpy(phis[:256], args.beta, grid)
    b = _kernels.inner_moments_numba(phis[:256], args.beta, grid)
    print("max relative deviation: %.2e" % np.max(np.abs(a - b) / np.abs(a)))


if __name__ == "__main__":
    main()
