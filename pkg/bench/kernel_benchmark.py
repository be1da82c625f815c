#!/usr/bin/env python3
"""Benchmark the numba stencil kernels against the pure-numpy fallback.

Runs the same workloads through both dispatch targets, reports best-of-N
wall times plus the maximum elementwise deviation between the two results
(which should be 0.0 -- both paths implement identical arithmetic).

    python3 bench/kernel_benchmark.py
    python3 bench/kernel_benchmark.py --n 512 --steps 4000 --repeats 5

Numba's JIT compile happens during an untimed warm-up call.  If numba is
disabled (NSB_NUMBA=0) or not installed, only the numpy path is timed.
"""

import argparse
import math
import time

import numpy as np

from nsblab import kernels
from nsblab.analytic import EquationParameters, reduce_equation
from nsblab.pde import Grid, gaussian_packet, stability_dt


def _best_time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def _max_diff(a, b):
    return max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))


def bench_field(n, steps, repeats):
    coeffs = reduce_equation(EquationParameters(r=1.0, v=0.0))
    grid = Grid(n, float(n) / 8.0)
    psi0 = gaussian_packet(grid, sigma0=grid.length / 16.0).values
    phi0 = np.zeros_like(psi0)
    # Fine grids host modes past the instability threshold, so keep the
    # simulated horizon short enough that amplified roundoff stays finite.
    bound = stability_dt(coeffs, grid, 0.7, "stencil")
    dt = min(0.5 * bound, 20.0 / steps)

    def run(backend):
        def call():
            out = kernels.run_field_second_order(
                psi0, phi0, coeffs.a_xx, coeffs.a_tt, coeffs.v, grid.dx, dt,
                steps, stride=steps, backend=backend)
            assert out[3] == -1, "benchmark run blew up"
            return out[:2]
        return call

    rows = []
    numpy_t, numpy_out = _best_time(run("numpy"), repeats)
    rows.append(("field second-order, numpy", numpy_t, "", ""))
    if kernels.NUMBA_ENABLED:
        run("numba")()  # warm-up: JIT compile outside the timed region
        numba_t, numba_out = _best_time(run("numba"), repeats)
        diff = max(_max_diff(numpy_out[0], numba_out[0]),
                   _max_diff(numpy_out[1], numba_out[1]))
        rows.append(("field second-order, numba", numba_t,
                     f"{numpy_t / numba_t:.1f}x", f"{diff:.1e}"))
    return rows


def bench_first_order(n, steps, repeats):
    grid = Grid(n, float(n) / 8.0)
    psi0 = gaussian_packet(grid, sigma0=grid.length / 16.0).values
    dt = 0.2 * grid.dx * grid.dx

    def run(backend):
        def call():
            out = kernels.run_field_first_order(
                psi0, 1.0, 0.0, grid.dx, dt, steps, stride=steps,
                backend=backend)
            assert out[2] == -1, "benchmark run blew up"
            return out[0]
        return call

    rows = []
    numpy_t, numpy_out = _best_time(run("numpy"), repeats)
    rows.append(("field first-order, numpy", numpy_t, "", ""))
    if kernels.NUMBA_ENABLED:
        run("numba")()
        numba_t, numba_out = _best_time(run("numba"), repeats)
        rows.append(("field first-order, numba", numba_t,
                     f"{numpy_t / numba_t:.1f}x",
                     f"{_max_diff(numpy_out, numba_out):.1e}"))
    return rows


def bench_uniform(steps, repeats):
    def run(stepper):
        def call():
            out_psi = np.empty(2, dtype=np.complex128)
            out_phi = np.empty(2, dtype=np.complex128)
            wrote, blew = stepper(out_psi, out_phi, 0.0 + 0j, 2.0j, 0.0,
                                  math.pi / 100.0, steps, steps)
            assert wrote == 2 and not blew
            return out_psi
        return call

    rows = []
    numpy_t, numpy_out = _best_time(run(kernels._uniform_rk4), repeats)
    rows.append(("uniform oscillator, python", numpy_t, "", ""))
    if kernels.NUMBA_ENABLED:
        run(kernels._uniform_rk4_fast)()
        numba_t, numba_out = _best_time(run(kernels._uniform_rk4_fast), repeats)
        rows.append(("uniform oscillator, numba", numba_t,
                     f"{numpy_t / numba_t:.1f}x",
                     f"{_max_diff(numpy_out, numba_out):.1e}"))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256,
                        help="grid points for the field workloads")
    parser.add_argument("--steps", type=int, default=2000,
                        help="time steps per field run")
    parser.add_argument("--uniform-steps", type=int, default=200_000,
                        help="time steps for the scalar workload")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repetitions (best is reported)")
    args = parser.parse_args(argv)

    print(f"backend flag {kernels.ENV_FLAG!r}: active = "
          f"{kernels.active_backend()} (numba enabled: {kernels.NUMBA_ENABLED})")
    print(f"field workloads: n={args.n}, steps={args.steps}; "
          f"uniform workload: steps={args.uniform_steps}; "
          f"best of {args.repeats}")
    print()
    rows = []
    rows += bench_field(args.n, args.steps, args.repeats)
    rows += bench_first_order(args.n, args.steps, args.repeats)
    rows += bench_uniform(args.uniform_steps, args.repeats)

    header = (f"{'workload':<30} {'best (s)':>10} {'speedup':>8} "
              f"{'max |diff|':>11}")
    print(header)
    print("-" * len(header))
    for name, seconds, speedup, diff in rows:
        print(f"{name:<30} {seconds:>10.4f} {speedup:>8} {diff:>11}")
    if not kernels.NUMBA_ENABLED:
        print("\nnumba path skipped (disabled or unavailable); "
              "unset NSB_NUMBA to compare both")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
