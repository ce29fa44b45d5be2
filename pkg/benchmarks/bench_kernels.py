"""Time the compiled kernels against the pure-Python mirror.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both backends consume the same Philox streams, so each pair of timings is
for bit-identical work.
"""
import argparse
import math
import time

import numpy as np

from mrsle import _pykernels

try:
    from mrsle import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def bg(seed):
    return np.random.Philox(np.random.SeedSequence([seed, 0]))


def case_rho(M):
    xi, v = np.empty(2001), np.empty((2, 2001))
    M.rho_path(bg(1), 3.0, 0.5, np.array([2.0, 2.0]), 0.0, np.array([2.0, 4.0]), 1e-3, 2000, 0, 0.0, 0.0,
               10.0, 1e-9, xi, v, np.empty(0))


def case_bessel(M):
    M.bessel_path(bg(2), 2.0, 2.0, 0.0, 1.0, 1e-3, 2000, 10.0, 1e-9, np.empty(2001), np.empty(2))


def case_multiradial(M):
    M.multiradial_path(bg(3), 3.0, 1.0, np.array([0.0, 2.1, 4.2]), 1e-3, 2000, 10.0, 1e-9, np.empty((2001, 3)))


def case_zipper(M):
    xi = np.cumsum(np.r_[0.0, math.sqrt(4e-3) * np.random.default_rng(0).standard_normal(400)])
    M.zipper_tips(xi, 2e-3, 1, 0.0, np.empty((401, 2)))


def case_lattice(M):
    none = np.zeros(0, dtype=np.int_)
    M.lattice_path(bg(4), 3.0, 0.0, 0.0, math.pi, 2, none, none, 0.0, 2e-3, 0.2, 10.0, 1e-9, 7000, 7000,
                   np.zeros(18), np.zeros((0, 4)))


CASES = {
    "rho_path (2000 steps)": case_rho,
    "bessel_path (2000 steps)": case_bessel,
    "multiradial_path (2000 steps)": case_multiradial,
    "zipper_tips (400 slits)": case_zipper,
    "lattice_path own clock (t=0.2)": case_lattice,
}


def best_of(fn, M, repeat):
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(M)
        ts.append(time.perf_counter() - t)
    return min(ts)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled backend unavailable; only the Python mirror can run")
        return
    print(f"{'kernel':34s} {'cython':>10s} {'python':>10s} {'speedup':>8s}")
    for name, fn in CASES.items():
        c = best_of(fn, _ckernels, args.repeat)
        p = best_of(fn, _pykernels, args.repeat)
        print(f"{name:34s} {c * 1e3:9.2f}ms {p * 1e3:9.2f}ms {p / c:7.0f}x")


if __name__ == "__main__":
    main()
