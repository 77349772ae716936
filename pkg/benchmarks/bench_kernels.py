"""Time the numba and numpy kernel backends on representative workloads.

Run ``python benchmarks/bench_kernels.py``.  Each kernel is called once to
trigger compilation, then timed over several repeats; the best time and
the maximum relative deviation between backends are printed.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from rydline import basis, kernels


def workloads(rng):
    # radial Numerov: eight n=30 channels on the default sqrt(r) grid
    x = basis.radial_grid(3 * 31**2)
    h = x[1] - x[0]
    q = np.array([basis._q_of_x(x, l, -0.5 / 900.0) for l in range(8)])
    # nuclear Sturm count: 64 energies on a 100k-point grid
    R = np.linspace(30.0, 2700.0, 100_000)
    two_m = 2 * 79212.74
    qn = two_m * (-0.0625 / R)
    E = np.linspace(-1e-5, -1e-9, 64)
    # Legendre moments for a soft-core mesh
    wq = rng.random((4000, 120))
    xc = rng.uniform(-1, 1, (4000, 120))
    pot = -rng.random((4000, 120))
    return {
        "numerov_inward": (q, h, 1e-30, 0.0),
        "sturm_scan": (qn, E, R[1] - R[0], two_m, False),
        "legendre_moments": (wq, xc, pot, 16),
    }


def _max_rel(a, b):
    if isinstance(a, tuple):
        return max(_max_rel(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.maximum(np.abs(a).max(), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if not kernels.NUMBA_KERNELS:
        print("numba unavailable; nothing to compare")
        return 1
    cases = workloads(np.random.default_rng(0))
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max rel diff':>14}")
    for name, call_args in cases.items():
        f_np, f_nb = kernels.NUMPY_KERNELS[name], kernels.NUMBA_KERNELS[name]
        ref, got = f_np(*call_args), f_nb(*call_args)  # also compiles
        t_np = min(timeit.repeat(lambda: f_np(*call_args), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}{_max_rel(ref, got):>14.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
