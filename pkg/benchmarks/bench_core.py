"""Throughput comparison of the compiled transition core vs the numpy fallback.

Runs the same birth-death chains through both backends (identical random
streams) on a small and a medium model and reports steps per second plus the
speedup.  Invoke as ``python benchmarks/bench_core.py [--steps N]``.
"""

from __future__ import annotations

import argparse
import importlib
import os
import sys
import time

import numpy as np


def run_backend(pure_python: bool, dim: int, side: float, steps: int):
    if pure_python:
        os.environ["HOLOFIELD_PURE_PYTHON"] = "1"
    else:
        os.environ.pop("HOLOFIELD_PURE_PYTHON", None)
    for mod in list(sys.modules):
        if mod.startswith("holofield"):
            del sys.modules[mod]
    backend = importlib.import_module("holofield.backend")
    geometry = importlib.import_module("holofield.geometry")
    kernels = importlib.import_module("holofield.kernels")
    interaction = importlib.import_module("holofield.interaction")
    sampler = importlib.import_module("holofield.sampler")

    window = geometry.box_window(
        geometry.Space("euclidean", dim), [(0.0, side)] * dim
    )
    pot = interaction.PotentialSpec.build(
        interaction.WidomRowlinsonProfile(), kernels.GaussianKernel(dim), 1.0, window
    )
    state = sampler.init_state(pot, sampler.SamplerConfig(), np.random.default_rng(0))
    t0 = time.perf_counter()
    state.advance(steps)
    dt = time.perf_counter() - t0
    return backend.BACKEND, dt, state.n, pot.grid.nodes.shape[0]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--steps-2d", type=int, default=4_000)
    args = parser.parse_args()

    print(f"{'model':<22}{'backend':<10}{'steps/s':>12}{'grid':>8}{'speedup':>9}")
    for dim, side, steps in ((1, 1.0, args.steps), (2, 6.0, args.steps_2d)):
        rates = {}
        for pure in (False, True):
            name, dt, n, grid = run_backend(pure, dim, side, steps)
            rates[name] = steps / dt
            label = f"d={dim} side={side:g}"
            speed = (
                f"{rates['compiled'] / rates['python']:>8.1f}x"
                if name == "python" and "compiled" in rates
                else ""
            )
            print(f"{label:<22}{name:<10}{steps / dt:>12.0f}{grid:>8}{speed:>9}")
        if "compiled" not in rates:
            print("  (compiled backend unavailable; install with the extension built)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
