"""Verification battery: correlation inequalities, dominance, invariances."""

from __future__ import annotations

import numpy as np
import pytest

from holofield.analysis import (
    BulkConditionError,
    TestReport,
    dominance_test,
    euclidean_invariance_test,
    fkg_oracle_covariance,
    fkg_test,
    laplace_monotonicity_oracle,
    laplace_monotonicity_test,
    lorentz_invariance_exact,
    mixed_noninvariance_test,
    poisson_null_calibration,
    window_growth_study,
)
from holofield.configurations import bump
from holofield.geometry import (
    box_window,
    euclidean,
    euclidean_isometry,
    identity,
)
from holofield.interaction import (
    LinearProfile,
    PotentialSpec,
    WidomRowlinsonProfile,
)
from holofield.kernels import GaussianKernel
from holofield.oracle import SeriesSpec
from holofield.sampler import SamplerConfig

K1 = GaussianKernel(1)
K2 = GaussianKernel(2)

# Frozen exact references (noninteracting model, d = 2); derivations are
# independent box quadratures over set partitions.
MIXED_DIFF = 0.4665468973921971
TAU2_BOOSTED_PAIR = 11.667438577829966


def _count_left(p: np.ndarray) -> float:
    return float(np.sum(p[:, 0] < 0.5))


def _count_right(p: np.ndarray) -> float:
    return float(np.sum(p[:, 0] >= 0.5))


def test_fkg_positive_association(wr_unit_samples):
    rep = fkg_test(
        wr_unit_samples, [_count_left, _count_right], names=["left", "right"]
    )
    assert rep.passed
    pair = rep.details["pairs"]["cov(left,right)"]
    # Ferromagnetic coupling: the covariance is genuinely positive here.
    assert pair["z"] > 3.0


def test_fkg_oracle_covariance_positive_to_six_digits():
    window = box_window(euclidean(1), [(0.0, 1.5)])
    pot = PotentialSpec.build(WidomRowlinsonProfile(), K1, 1.0, window)
    spec = SeriesSpec(pot, nmax=16, axis_splits=((0.75,),))
    cov, bound = fkg_oracle_covariance(
        spec, np.array([[0.0, 0.75]]), np.array([[0.75, 1.5]])
    )
    assert bound < 1e-6
    assert cov - bound > 0.0
    assert cov == pytest.approx(0.03843802929643264, abs=1e-7)


def test_dominance_by_poisson(wr_unit_samples, wr_unit_spec):
    regions = [np.array([[0.0, 1.0]]), np.array([[0.0, 0.5]])]
    h = bump(np.array([0.5]), 0.4, 1.0)
    rep = dominance_test(wr_unit_samples, wr_unit_spec, 1.0, regions, h=h)
    assert rep.passed
    # margin is the worst z-score of (ceiling - empirical); far positive here
    assert rep.margin >= rep.tolerance


def test_laplace_monotonicity_oracle_strict_ordering():
    window = box_window(euclidean(1), [(0.0, 1.0)])
    pot = PotentialSpec.build(WidomRowlinsonProfile(), K1, 1.0, window)
    h = bump(np.array([0.5]), 0.4, 1.0)
    vals, bounds = laplace_monotonicity_oracle(pot, [0.5, 1.0, 1.5], h, nmax=14)
    for (va, ba), (vb, bb) in zip(zip(vals, bounds), zip(vals[1:], bounds[1:])):
        gap = va - vb
        assert gap > ba + bb  # strictly decreasing beyond certified error
        assert gap > 1e-6  # six-digit strictness


def test_laplace_monotonicity_monte_carlo():
    window = box_window(euclidean(1), [(0.0, 2.0)])
    pot = PotentialSpec.build(WidomRowlinsonProfile(), K1, 1.0, window)
    h = bump(np.array([1.0]), 0.6, 1.0)
    rep = laplace_monotonicity_test(
        pot,
        [0.5, 1.5],
        h,
        n_samples=4000,
        seed=1,
        config=SamplerConfig(burnin=500, thin=3),
    )
    assert rep.passed


def test_euclidean_invariance_translation(wr_line_samples, wr_line_spec):
    g = euclidean_isometry(np.eye(1), np.array([0.4]))
    points = [np.array([5.5]), np.array([6.3])]
    rep = euclidean_invariance_test(wr_line_samples, wr_line_spec, g, points)
    assert rep.passed
    assert rep.details["bias_bound"] < 1e-6


def test_euclidean_invariance_identity_is_exact(wr_line_samples, wr_line_spec):
    rep = euclidean_invariance_test(
        wr_line_samples, wr_line_spec, identity(1), [np.array([5.5]), np.array([6.3])]
    )
    assert rep.margin == 0.0


def test_euclidean_invariance_refuses_boundary_points(
    wr_line_samples, wr_line_spec
):
    g = euclidean_isometry(np.eye(1), np.array([0.4]))
    with pytest.raises(BulkConditionError):
        euclidean_invariance_test(
            wr_line_samples, wr_line_spec, g, [np.array([0.5]), np.array([6.0])]
        )


def test_lorentz_exact_boost_invariance_at_zero_coupling():
    """Two-point slice moments are boost invariant in the free model."""
    ys = [np.array([0.4, 0.3]), np.array([-0.2, 0.6])]
    diff, tau2 = lorentz_invariance_exact(K2, 0.3, ys)
    assert abs(diff) < 1e-6
    assert tau2.real == pytest.approx(TAU2_BOOSTED_PAIR, abs=1e-8)
    assert abs(tau2.imag) < 1e-10


def test_mixed_moment_breaks_boost_invariance():
    """Conjugated mixed moments must move under boosts at generic points."""
    ys = [np.array([0.4, 0.3]), np.array([-0.2, 0.6])]
    rep = mixed_noninvariance_test(K2, 0.5, ys)
    assert rep.passed
    assert rep.margin == pytest.approx(MIXED_DIFF, abs=1e-8)
    assert rep.margin > 5.0 * rep.details["identity_tol"]
    assert rep.details["identity_gap"] < 1e-12


def test_mixed_moment_null_control_at_origin():
    """Anchored at the origin at zero time the relocation fixes the point."""
    ys = [np.array([0.0, 0.0]), np.array([0.0, 0.7])]
    rep = mixed_noninvariance_test(K2, 0.5, ys)
    assert rep.passed
    assert rep.details["null_control"]
    assert rep.margin < 5e-7


def test_mixed_moment_zero_rapidity_is_trivial():
    ys = [np.array([0.4, 0.3]), np.array([-0.2, 0.6])]
    rep = mixed_noninvariance_test(K2, 0.0, ys)
    assert rep.passed and rep.details["null_control"]
    assert rep.margin == 0.0


def test_window_growth_study_quick():
    out = window_growth_study(
        WidomRowlinsonProfile(),
        K1,
        beta=1.0,
        sizes=[2.0, 4.0, 6.0],
        n_samples=4000,
        seed=3,
        dim=1,
        config=SamplerConfig(burnin=800, thin=3),
    )
    assert out["flags"]["laplace_non_increasing"]
    assert len(out["rows"]) == 3
    assert out["ok"]


def test_poisson_null_calibration_quick():
    window = box_window(euclidean(1), [(0.0, 2.0)])
    pot = PotentialSpec.build(LinearProfile(), K1, 0.0, window)
    out = poisson_null_calibration(pot, n_seeds=12, n_samples=1500, seed0=5)
    assert out["z_scores"].shape == (12, 5)
    assert out["outside_3sigma"] <= 3
    finite = np.isfinite(out["z_scores"])
    assert finite.all()


def test_poisson_null_calibration_requires_zero_coupling(wr_unit_spec):
    with pytest.raises(ValueError):
        poisson_null_calibration(wr_unit_spec, n_seeds=1)


def test_report_serialization():
    rep = TestReport("demo", True, 0.1, 0.5, {"x": np.float64(1.5)})
    data = rep.to_jsonable()
    assert data["passed"] is True
    assert isinstance(data["details"]["x"], float)
