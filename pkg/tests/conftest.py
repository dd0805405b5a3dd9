"""Shared fixtures: model specs and cached Monte Carlo sample streams.

The expensive MCMC streams are session-scoped so that estimator, analysis,
and acceptance tests can share them instead of re-running the sampler.
"""

from __future__ import annotations

import numpy as np
import pytest

from holofield.geometry import box_window, euclidean
from holofield.interaction import PotentialSpec, WidomRowlinsonProfile
from holofield.kernels import GaussianKernel
from holofield.sampler import SamplerConfig, run


@pytest.fixture(scope="session")
def gauss1() -> GaussianKernel:
    return GaussianKernel(dim=1)


@pytest.fixture(scope="session")
def gauss2() -> GaussianKernel:
    return GaussianKernel(dim=2)


@pytest.fixture(scope="session")
def wr_unit_spec(gauss1) -> PotentialSpec:
    """Overlap-suppressed model at beta = 1 on the unit interval."""
    window = box_window(euclidean(1), [(0.0, 1.0)])
    return PotentialSpec.build(WidomRowlinsonProfile(), gauss1, 1.0, window)


@pytest.fixture(scope="session")
def wr_unit_samples(wr_unit_spec):
    """20k thinned samples of the unit-interval model (seed 2024)."""
    cfg = SamplerConfig(intensity=1.0, burnin=2000, thin=5)
    samples, diag = run(wr_unit_spec, cfg, 20_000, seed=2024)
    assert diag.max_drift < 1e-9
    return samples


@pytest.fixture(scope="session")
def wr_line_spec(gauss1) -> PotentialSpec:
    """Same model on the longer window [0, 12] used for invariance checks."""
    window = box_window(euclidean(1), [(0.0, 12.0)])
    return PotentialSpec.build(WidomRowlinsonProfile(), gauss1, 1.0, window)


@pytest.fixture(scope="session")
def wr_line_samples(wr_line_spec):
    cfg = SamplerConfig(intensity=1.0, burnin=2000, thin=5)
    samples, diag = run(wr_line_spec, cfg, 20_000, seed=515)
    assert diag.max_drift < 1e-9
    return samples


@pytest.fixture(scope="session")
def rng_factory():
    def make(seed: int = 0) -> np.random.Generator:
        return np.random.default_rng(seed)

    return make
