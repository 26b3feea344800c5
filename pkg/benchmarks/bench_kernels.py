#!/usr/bin/env python3
"""Compare the compiled interpolation kernels against the numpy fallback.

The velocity lookup is the innermost operation of trajectory integration
(four evaluations per RK4 step per trajectory), so this is the loop that
decides whether ensemble equivariance runs take seconds or minutes.

Usage: python benchmarks/bench_kernels.py [--points 2000] [--repeats 50]
"""

import argparse
import time

import numpy as np

from ontosim import _kernels_np, kernels


def bench(fn, *args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    if kernels.BACKEND != "cython":
        print("compiled backend unavailable; timing the fallback against itself")

    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.BACKEND}; {args.points} query points, best of {args.repeats}")
    header = f"{'case':>28s} {'compiled':>12s} {'numpy':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for ndim, cells in ((1, 64), (2, 32), (3, 16)):
        shape = (cells,) * ndim
        field = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        vgrids = rng.standard_normal((ndim,) + shape)
        dens = rng.random(shape) + 0.01
        pts = rng.uniform(-10.0, 10.0, size=(args.points, ndim))
        origin, dx = -10.0, 20.0 / cells

        for label, f_c, f_np, fargs in (
            (f"interp complex {ndim}d", kernels.interp_periodic, _kernels_np.interp_periodic,
             (field, pts, origin, dx)),
            (f"velocity+density {ndim}d", kernels.velocity_at, _kernels_np.velocity_at,
             (vgrids, dens, pts, origin, dx)),
        ):
            t_c = bench(f_c, *fargs, repeats=args.repeats)
            t_np = bench(f_np, *fargs, repeats=args.repeats)
            print(f"{label:>28s} {t_c * 1e6:>10.1f}us {t_np * 1e6:>10.1f}us {t_np / t_c:>8.1f}x")

    # agreement spot check
    a = kernels.interp_periodic(field, pts, origin, dx)
    b = _kernels_np.interp_periodic(field, pts, origin, dx)
    print(f"\nmax backend disagreement: {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
