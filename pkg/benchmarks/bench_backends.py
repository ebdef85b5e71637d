"""Time one training epoch under each kernel backend.

    python3 benchmarks/bench_backends.py [--epochs 300] [--repeats 3]

Prints microseconds per epoch for every (outcome, n, d) case and the
speedup of the compiled kernels over the pure-Python fallback.
"""
import argparse
import time

import numpy as np

from spinn import _backend
from spinn.network import NetworkConfig, init_params
from spinn.optimizer import FitConfig, Problem, run_epochs
from spinn.penalties import PenaltySpec
from spinn.simdata import SimConfig, gen_dataset

CASES = [("regression", 300, 20), ("classification", 500, 20), ("survival", 300, 20),
         ("regression", 500, 1000)]


def time_backend(problem, init, fc, spec, backend, epochs, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        run_epochs(problem, init, fc, spec, epochs=epochs, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return 1e6 * best / epochs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", type=int, default=300)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    backends = _backend.available()
    print(f"backends: {', '.join(backends)} (default {_backend.NAME})")
    print(f"{'outcome':<16}{'n':>6}{'d':>6}" + "".join(f"{b + ' us/ep':>18}" for b in backends)
          + f"{'speedup':>10}")
    # lam small enough that no column is zeroed, so every epoch does full work
    spec = PenaltySpec("group-mcp", 1e-6)
    fc = FitConfig(alpha=1e-3)
    for outcome, n, d in CASES:
        ds, _ = gen_dataset(SimConfig(n, d, outcome=outcome, seed=1))
        problem = Problem(ds)
        init = init_params(NetworkConfig(d, (10, 5)), seed=0)
        us = [time_backend(problem, init, fc, spec, b, args.epochs, args.repeats)
              for b in backends]
        speed = f"{us[0] / us[-1]:9.1f}x" if len(us) > 1 else f"{'-':>10}"
        print(f"{outcome:<16}{n:>6}{d:>6}" + "".join(f"{u:18.1f}" for u in us) + speed)


if __name__ == "__main__":
    main()
