"""Time the compiled chain kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat R]

Both backends get identical noise; the script also reports the largest
difference between their final ensembles.
"""
import argparse
import time

import numpy as np

from langevin_schemes import kernels
from langevin_schemes.measures import GaussianMeasure
from langevin_schemes.potentials import GaussianPotential, MixtureTarget
from langevin_schemes.samplers import Ensemble, run_chain

CASES = [
    # name, stepper, target, particles, steps
    ("ULA gaussian 1D, single chain", "ula", GaussianPotential(GaussianMeasure.standard(1)), 1, 100_000),
    ("SLA gaussian 3D, 1e3 x 1e3", "sla",
     GaussianPotential(GaussianMeasure(np.zeros(3), np.diag([0.5, 1.0, 2.0]))), 1000, 1000),
    ("ULA mixture 2D, 1e4 x 100", "ula", MixtureTarget([0.5, 0.2]), 10_000, 100),
    ("SLA mixture 2D, single chain", "sla", MixtureTarget([0.5, 0.2]), 1, 20_000),
    ("SLA mixture 2D, 1e3 x 1e3", "sla", MixtureTarget([0.5, 0.2]), 1000, 1000),
]


def timed(stepper, pot, particles, steps, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = Ensemble(np.zeros((particles, pot.dimension)))
        t0 = time.perf_counter()
        res = run_chain(stepper, pot, start, 0.1, steps, seed=11, burn_in=steps // 2,
                        backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    if not kernels.compiled_available():
        print("compiled kernels are not built; only the numpy fallback is available")
        return
    print(f"{'case':<32} {'compiled s':>11} {'numpy s':>9} {'speedup':>8} {'max |diff|':>11}")
    for name, stepper, pot, n_part, steps in CASES:
        tc, rc = timed(stepper, pot, n_part, steps, "compiled", args.repeat)
        tp, rp = timed(stepper, pot, n_part, steps, "python", args.repeat)
        diff = float(np.max(np.abs(rc.ensemble.positions - rp.ensemble.positions)))
        print(f"{name:<32} {tc:>11.4f} {tp:>9.4f} {tp / tc:>7.1f}x {diff:>11.2e}")


if __name__ == "__main__":
    main()
