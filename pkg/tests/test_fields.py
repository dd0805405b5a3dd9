"""Complexified field statistics: estimators, symmetries, a-priori bounds."""

from __future__ import annotations

import numpy as np
import pytest

from holofield.configurations import bump
from holofield.fields import (
    CorrelationEstimate,
    canonical_point_order,
    estimate_functional,
    estimate_laplace,
    estimate_moment,
    field_complex,
    moment_bound_check,
    paired_moment_difference,
)
from holofield.kernels import GaussianKernel
from holofield.sampler import SampleSet

K1 = GaussianKernel(1)

# Frozen series-oracle references for the unit-window overlap model; see
# test_oracle.py for their derivations.
WR_COUNT = 0.3432880692563192
WR_LAPLACE = 0.9300768458214407
WR_S1_CENTER = 0.3168602177080705


def test_field_complex_explicit_sum():
    pts = np.array([[0.2], [0.9]])
    z = np.array([0.4 + 0.1j])
    want = np.exp(-((z[0] - 0.2) ** 2)) + np.exp(-((z[0] - 0.9) ** 2))
    assert field_complex(pts, K1, z) == pytest.approx(want, abs=1e-14)
    weighted = field_complex(pts, K1, z, charges=np.array([2.0, 0.5]))
    want_w = 2.0 * np.exp(-((z[0] - 0.2) ** 2)) + 0.5 * np.exp(-((z[0] - 0.9) ** 2))
    assert weighted == pytest.approx(want_w, abs=1e-14)


def test_field_of_empty_configuration_vanishes():
    assert field_complex(np.empty((0, 1)), K1, np.array([0.3 + 0.2j])) == 0.0


def test_estimated_count_matches_series_oracle(wr_unit_samples):
    est = estimate_functional(wr_unit_samples, lambda p: p.shape[0])
    assert est.value.real == pytest.approx(WR_COUNT, abs=4.0 * est.stderr_re)
    assert est.stderr_re < 0.01


def test_estimated_laplace_matches_series_oracle(wr_unit_samples):
    h = bump(np.array([0.5]), 0.4, 1.0)
    est = estimate_laplace(wr_unit_samples, h)
    assert est.value.real == pytest.approx(WR_LAPLACE, abs=4.0 * est.stderr_re)


def test_estimated_first_moment_matches_series_oracle(wr_unit_samples):
    zs = np.array([[0.5 + 0j]])
    est = estimate_moment(wr_unit_samples, K1, zs)
    assert est.value.real == pytest.approx(WR_S1_CENTER, abs=4.0 * est.stderr_re)
    assert est.value.imag == 0.0


def test_moment_reality_at_real_points(wr_unit_samples):
    """Correlations of the real-kernel field at real points have no phase."""
    zs = np.array([[0.3 + 0j], [0.7 + 0j]])
    est = estimate_moment(wr_unit_samples, K1, zs)
    assert est.value.imag == 0.0
    assert est.stderr_im == 0.0


def test_moment_conjugation_symmetry(wr_unit_samples):
    """Pathwise reflection identities of the analytic field.

    For a real-analytic kernel ``phi(conj z) = conj(phi(z))`` sample by
    sample, which gives two exact moment identities: conjugating the moment
    flips the factor flags, and flipping flags together with conjugating the
    points changes nothing.
    """
    zs = np.array([[0.3 + 0.15j], [0.6 - 0.2j]])
    conj = [False, True]
    flipped = [not c for c in conj]
    a = estimate_moment(wr_unit_samples, K1, zs, conj)
    flags_only = estimate_moment(wr_unit_samples, K1, zs, flipped)
    both = estimate_moment(wr_unit_samples, K1, np.conj(zs), flipped)
    assert abs(np.conj(a.value) - flags_only.value) < 1e-10
    assert abs(a.value - both.value) < 1e-10


def test_moment_permutation_invariance_is_exact(wr_unit_samples):
    """Canonical point ordering makes the estimate bit-identical under swaps."""
    zs = np.array([[0.2 + 0.1j], [0.8 - 0.05j], [0.5 + 0j]])
    conj = [False, True, False]
    a = estimate_moment(wr_unit_samples, K1, zs, conj)
    perm = [2, 0, 1]
    b = estimate_moment(
        wr_unit_samples, K1, zs[perm], [conj[i] for i in perm]
    )
    assert a.value == b.value  # exact equality, not approximate
    assert a.stderr_re == b.stderr_re and a.stderr_im == b.stderr_im


def test_canonical_point_order_is_order_free():
    zs = np.array([[0.5 + 1j], [0.1 - 2j], [0.5 + 0.5j]])
    conj = [True, False, False]
    base = canonical_point_order(zs, conj)
    rng = np.random.default_rng(0)
    for _ in range(5):
        p = rng.permutation(3)
        got = canonical_point_order(zs[p], [conj[i] for i in p])
        assert np.array_equal(got[0], base[0])
        assert got[1] == base[1]


def test_zeroth_moment_is_one(wr_unit_samples):
    est = estimate_moment(wr_unit_samples, K1, np.empty((0, 1), dtype=complex))
    assert est.value == 1.0 + 0.0j
    assert est.stderr == 0.0


def test_paired_difference_of_identical_inputs_is_zero(wr_unit_samples):
    zs = np.array([[0.4 + 0.2j], [0.6 - 0.1j]])
    conj = [False, True]
    diff = paired_moment_difference(wr_unit_samples, K1, zs, conj, zs, conj)
    assert diff.value == 0.0 + 0.0j
    assert diff.stderr == 0.0


def test_estimate_requires_enough_samples(wr_unit_spec):
    short = SampleSet([np.empty((0, 1))] * 10, dim=1)
    with pytest.raises(ValueError):
        estimate_functional(short, lambda p: p.shape[0])


def test_moment_bound_check(wr_unit_samples, wr_unit_spec):
    box = np.array([[0.0, 1.0, -0.3, 0.3]])
    out = moment_bound_check(
        wr_unit_samples, K1, box, n=2, papangelou_bound=wr_unit_spec.papangelou_bound
    )
    assert out["ok"]
    assert np.log(out["empirical"] + 3.0 * out["stderr"]) <= out["log_bound"]
    assert out["g_sup"] >= 1.0  # envelope reaches the kernel peak


def test_moment_bound_check_higher_order(wr_unit_samples, wr_unit_spec):
    box = np.array([[0.2, 0.8, -0.2, 0.2]])
    out = moment_bound_check(
        wr_unit_samples, K1, box, n=4, papangelou_bound=wr_unit_spec.papangelou_bound
    )
    assert out["ok"]


def test_correlation_estimate_validation():
    with pytest.raises(ValueError):
        CorrelationEstimate(complex("nan"), 0.0, 0.0, 10, {})
    est = CorrelationEstimate(1.0 + 2.0j, 0.3, 0.4, 10, {})
    assert est.stderr == pytest.approx(0.5)
    data = est.to_jsonable()
    assert data["n_samples"] == 10
