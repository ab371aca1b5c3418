"""Time the frame kernel on both backends over torus quadrature-sized batches.

    python3 benchmarks/bench_kernels.py [--sizes 1000 10000 100000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from h1geo import _kernels
from h1geo.catalog import make_surface


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    patch = make_surface("torus_revolution")
    rng = np.random.default_rng(0)
    if _kernels.HAVE_NUMBA:
        _kernels.frame_kernel_numba(patch.immersion_jets([0.1], [0.2]), 1)  # compile outside the timing

    print(f"{'nodes':>8} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for n in args.sizes:
        imm = patch.immersion_jets(rng.uniform(0, 2 * np.pi, n), rng.uniform(0, 2 * np.pi, n))
        t_np = best_of(lambda: _kernels.frame_kernel_numpy(imm, 1), args.repeat)
        if not _kernels.HAVE_NUMBA:
            print(f"{n:>8} {1e3 * t_np:>11.3f} {'-':>11} {'-':>8} {'-':>11}")
            continue
        t_nb = best_of(lambda: _kernels.frame_kernel_numba(imm, 1), args.repeat)
        q1, _ = _kernels.frame_kernel_numpy(imm, 1)
        q2, _ = _kernels.frame_kernel_numba(imm, 1)
        diff = float(np.max(np.abs(q1 - q2)))
        print(f"{n:>8} {1e3 * t_np:>11.3f} {1e3 * t_nb:>11.3f} {t_np / t_nb:>8.1f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
