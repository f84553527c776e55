"""Wall time of the compiled and numpy hierarchy steppers on the same problems.

Usage: python benchmarks/bench_kernel.py [--steps N] [--repeat R]
"""

import argparse
import math
import time

import numpy as np

from zenoheom import _heom_kernel_py
from zenoheom.bath import Lorentzian, OhmicDrude
from zenoheom.heom import build_finite_T_generator, build_zero_T_generator
from zenoheom.heom.propagate import auto_dt
from zenoheom.models import biased_qubit, biased_qutrit

try:
    from zenoheom import _heom_kernel
except ImportError:  # extension not built
    _heom_kernel = None

CASES = [
    ("qubit zero-T L=10", lambda: build_zero_T_generator(biased_qubit(0.85, -0.255), Lorentzian(0.1, 0.2, 0.9), 10)),
    ("qubit zero-T L=40", lambda: build_zero_T_generator(biased_qubit(1, 0), Lorentzian(0.5, 0.05), 40)),
    ("qutrit zero-T L=20", lambda: build_zero_T_generator(biased_qutrit(1, 0.5), Lorentzian(0.2, 0.25, 2.2), 20)),
    ("qubit beta=0.5 L=4", lambda: build_finite_T_generator(biased_qubit(1, -0.1), OhmicDrude(0.05, 10), 0.5, 6, 4)),
]


def best_time(backend, gen, x0, h, steps, repeat):
    best = math.inf
    for _ in range(repeat):
        x = x0.copy()
        t0 = time.perf_counter()
        backend.rk4_steps(x, *gen.kernel_args(), h, steps)
        best = min(best, time.perf_counter() - t0)
    return best, x


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _heom_kernel is None:
        print("compiled kernel not built; only the numpy backend is timed")
    print(f"{'case':<22}{'nodes':>8}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>9}{'max diff':>11}")
    for name, make in CASES:
        gen = make()
        N, D = len(gen.layout), gen.diag.shape[0]
        x0 = np.zeros((N, D), dtype=complex)
        x0[0, 0] = 1.0
        # inside the RK4 stability region, otherwise both backends just amplify rounding
        h = min(0.01, auto_dt(gen))
        t_py, x_py = best_time(_heom_kernel_py, gen, x0, h, args.steps, args.repeat)
        if _heom_kernel is None:
            print(f"{name:<22}{N:>8}{t_py:>12.4f}{'-':>12}{'-':>9}{'-':>11}")
            continue
        t_c, x_c = best_time(_heom_kernel, gen, x0, h, args.steps, args.repeat)
        diff = float(np.max(np.abs(x_py - x_c)))
        print(f"{name:<22}{N:>8}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
