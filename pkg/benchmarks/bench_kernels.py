"""Compare the numba and numpy paths of the hot kernels.

    python3 benchmarks/bench_kernels.py --n 64 --order 5

Kernels are timed in isolation on data taken from a real step, then a full
step is timed with each backend switched on in turn.
"""
import argparse
import timeit

import numpy as np

from macflow import matfield, polymax
from macflow._accel import HAVE_NUMBA
from macflow.etdrk import RescaledETDRK
from macflow.matfield import ModelParams
from macflow.scenarios import ScenarioSpec


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64, help="grid size per axis")
    ap.add_argument("--order", type=int, default=5)
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    n = args.n
    p = ModelParams(2, 2, 0.01)
    U = ScenarioSpec("petal", 2, 2, n, n).build()
    st = RescaledETDRK(p, (n, n), args.order, args.tau)
    _, stats = st.step(U, keep_polys=True)
    poly = stats.polys[-1]
    B, _ = polymax._stack_coefficients(poly.N0, poly.C)
    h = polymax.h_coefficients_numpy(B)

    kernels = [
        ("stabilized_N", lambda: matfield.stabilized_n_numpy(U.data, p.kappa),
         lambda: matfield.stabilized_n_numba(U.data, p.kappa)),
        ("h_coefficients", lambda: polymax.h_coefficients_numpy(B),
         lambda: polymax.h_coefficients_numba(B)),
        ("exact_max", lambda: polymax.exact_max_numpy(h), lambda: polymax.exact_max_numba(h)),
    ]
    for _, _, fast in kernels:
        fast()  # compile outside the timed region

    print(f"grid {n}x{n}, order {args.order}, tau {args.tau}, {n * n} points")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, slow, fast in kernels:
        number = 3 if name == "exact_max" else 20
        ts = best_of(slow, args.repeat, number)
        tf = best_of(fast, args.repeat, number)
        print(f"{name:<16}{ts * 1e3:>12.3f}{tf * 1e3:>12.3f}{ts / tf:>10.2f}")

    times = {}
    for flag in (False, True):
        matfield.USE_NUMBA = polymax.USE_NUMBA = flag
        st.step(U)
        times[flag] = best_of(lambda: st.step(U), args.repeat, 3)
    matfield.USE_NUMBA = polymax.USE_NUMBA = True
    print(f"{'full step':<16}{times[False] * 1e3:>12.3f}{times[True] * 1e3:>12.3f}"
          f"{times[False] / times[True]:>10.2f}")


if __name__ == "__main__":
    main()
