"""Timing comparison of the compiled and pure-Python integrator kernels.

Runs the same fixed-step propagation of the symmetric choreography through
both backends and prints per-step cost and the speedup.  Usage:

    python benchmarks/bench_integrator.py --steps 20000 --repeats 5
"""

import argparse
import math
import time

from limax.analytic import trisectrix_initial_state
from limax.core import SystemParams
from limax.dynamics import IntegratorConfig, integrate


def time_backend(backend, state, params, cfg, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        integrate(state, params, cfg, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--dt", type=float, default=None,
                        help="step size (default: one period / steps)")
    args = parser.parse_args()

    params = SystemParams()
    state = trisectrix_initial_state(params)
    dt = args.dt if args.dt is not None else params.period / args.steps
    cfg = IntegratorConfig(dt=dt, n_steps=args.steps)

    results = {}
    for backend in ("python", "compiled"):
        try:
            results[backend] = time_backend(backend, state, params, cfg, args.repeats)
        except ValueError as exc:
            print(f"{backend:>9}: unavailable ({exc})")

    print(f"{args.steps} steps, dt = {dt:.3e}, best of {args.repeats}")
    for backend, seconds in results.items():
        per_step = seconds / args.steps * 1e6
        print(f"{backend:>9}: {seconds * 1e3:8.2f} ms  ({per_step:7.3f} us/step)")
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['compiled']:.1f}x")


if __name__ == "__main__":
    main()
