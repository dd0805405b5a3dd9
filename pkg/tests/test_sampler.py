"""Birth-death Metropolis sampler: balance identities, null model, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from holofield.configurations import Configuration
from holofield.geometry import box_window, euclidean
from holofield.interaction import (
    LinearProfile,
    PotentialSpec,
    WidomRowlinsonProfile,
    papangelou,
)
from holofield.kernels import GaussianKernel
from holofield.sampler import (
    CacheDriftError,
    SamplerConfig,
    birth_acceptance,
    death_acceptance,
    init_state,
    run,
    run_chains,
)
from holofield.stats import batch_means


@pytest.fixture(scope="module")
def small_spec() -> PotentialSpec:
    window = box_window(euclidean(1), [(0.0, 2.0)])
    return PotentialSpec.build(WidomRowlinsonProfile(), GaussianKernel(1), 1.0, window)


def test_birth_death_acceptance_identity(small_spec):
    """min(1, r) / min(1, 1/r) equals the Radon-Nikodym ratio r exactly."""
    cfg = SamplerConfig(intensity=1.2)
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = rng.integers(0, 5)
        eta = Configuration(rng.uniform(0.0, 2.0, (n, 1)))
        x = rng.uniform(0.0, 2.0, 1)
        sigma = cfg.intensity * small_spec.window.volume
        r = papangelou(small_spec, x, eta) * sigma / (len(eta) + 1)
        ab = birth_acceptance(small_spec, cfg, x, eta)
        ad = death_acceptance(small_spec, cfg, x, eta)
        assert ab == pytest.approx(min(1.0, r), rel=1e-12)
        assert ad == pytest.approx(min(1.0, 1.0 / r), rel=1e-12)
        assert ab / ad == pytest.approx(r, rel=1e-12)


def test_zero_coupling_is_poisson():
    """At beta = 0 the chain must reproduce Poisson count moments."""
    window = box_window(euclidean(1), [(0.0, 2.0)])
    spec = PotentialSpec.build(LinearProfile(), GaussianKernel(1), 0.0, window)
    cfg = SamplerConfig(intensity=1.5, burnin=500, thin=4)
    samples, diag = run(spec, cfg, 20_000, seed=11)
    sigma = 1.5 * 2.0
    counts = samples.counts()
    mean, se = batch_means(counts, n_batches=32)
    assert abs(mean - sigma) < 3.5 * se
    var_mean, var_se = batch_means((counts - counts.mean()) ** 2, n_batches=32)
    assert abs(var_mean - sigma) < 4.0 * var_se
    assert diag.max_drift < 1e-10


def test_interaction_suppresses_counts(wr_unit_samples):
    """Nonnegative energies thin the process: mean count drops below sigma."""
    counts = wr_unit_samples.counts()
    mean, se = batch_means(counts, n_batches=32)
    assert mean < 1.0 - 5.0 * se


def test_run_deterministic_same_seed(small_spec):
    cfg = SamplerConfig(burnin=200, thin=2)
    a, _ = run(small_spec, cfg, 500, seed=77)
    b, _ = run(small_spec, cfg, 500, seed=77)
    assert len(a) == len(b)
    for pa, pb in zip(a.points, b.points):
        assert np.array_equal(pa, pb)


def test_run_chains_worker_count_independence(small_spec):
    cfg = SamplerConfig(burnin=100, thin=2)
    a, _ = run_chains(small_spec, cfg, 200, n_chains=4, seed=5, workers=1)
    b, _ = run_chains(small_spec, cfg, 200, n_chains=4, seed=5, workers=3)
    assert len(a) == len(b) == 800
    for pa, pb in zip(a.points, b.points):
        assert np.array_equal(pa, pb)


def test_sampleset_ndjson_round_trip(small_spec, tmp_path):
    cfg = SamplerConfig(burnin=50, thin=1)
    samples, _ = run(small_spec, cfg, 100, seed=3)
    path = tmp_path / "samples.ndjson"
    samples.write_ndjson(path)
    back = type(samples).read_ndjson(path, dim=1)
    assert len(back) == len(samples)
    for pa, pb in zip(samples.points, back.points):
        assert np.array_equal(pa, pb)


def test_drift_guard_raises_on_corruption(small_spec):
    state = init_state(small_spec, SamplerConfig(), seed=1)
    state.advance(500)
    state.action += 1.0  # corrupt the cached action on purpose
    with pytest.raises(CacheDriftError):
        state.check_drift()


def test_drift_check_refreshes_caches(small_spec):
    state = init_state(small_spec, SamplerConfig(), seed=1)
    state.advance(2000)
    drift = state.check_drift()
    assert drift < 1e-10


def test_diagnostics_jsonable_handles_short_runs(small_spec):
    cfg = SamplerConfig(burnin=10, thin=1)
    _, diag = run(small_spec, cfg, 8, seed=2)
    data = diag.to_jsonable()
    assert data["iact"] is None or np.isfinite(data["iact"])
    assert data["steps"] == diag.steps
    assert 0.0 <= diag.birth_rate <= 1.0
    assert 0.0 <= diag.death_rate <= 1.0


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(intensity=0.0)
    with pytest.raises(ValueError):
        SamplerConfig(thin=0)
    with pytest.raises(ValueError):
        SamplerConfig(burnin=-1)
