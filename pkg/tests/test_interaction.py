"""Interaction energies: profiles, bounds, papangelou factors, condition audits."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from holofield.configurations import Configuration, empty
from holofield.geometry import box_window, euclidean
from holofield.interaction import (
    ChargeMixProfile,
    LinearProfile,
    PotentialSpec,
    WidomRowlinsonProfile,
    energy_diff,
    papangelou,
    potential,
    profile_from_config,
    verify_conditions,
)
from holofield.kernels import GaussianKernel


@pytest.fixture(scope="module")
def wr_spec6() -> PotentialSpec:
    window = box_window(euclidean(1), [(0.0, 6.0)])
    return PotentialSpec.build(WidomRowlinsonProfile(), GaussianKernel(1), 1.0, window)


def test_profile_values_and_slopes():
    phi = np.array([0.0, 0.5, 2.0])
    lin = LinearProfile()
    wr = WidomRowlinsonProfile()
    assert np.allclose(lin.value(phi, 1.0), phi)
    assert np.allclose(wr.value(phi, 1.0), 1.0 - np.exp(-phi))
    assert lin.slope_bound() == 1.0 and wr.slope_bound() == 1.0
    mix = ChargeMixProfile(((0.5, 0.25), (2.0, 0.75)))
    assert mix.slope_bound() == pytest.approx(0.5 * 0.25 + 2.0 * 0.75)


def test_charge_mix_single_unit_charge_equals_overlap_profile():
    """At unit coupling a single unit charge reduces to the overlap profile.

    The mixture value is ``sum_i w_i (1 - exp(-s_i beta t)) / beta``, so the
    degenerate charge distribution at ``s = 1`` matches ``1 - exp(-t)``
    exactly when ``beta = 1``.
    """
    mix = ChargeMixProfile(((1.0, 1.0),))
    wr = WidomRowlinsonProfile()
    phi = np.linspace(0.0, 4.0, 50)
    assert np.allclose(mix.value(phi, 1.0), wr.value(phi, 1.0), atol=1e-14)


def test_charge_mix_degenerates_to_linear_at_zero_coupling():
    mix = ChargeMixProfile(((0.5, 0.5), (2.0, 0.5)))
    phi = np.linspace(0.0, 3.0, 20)
    assert np.allclose(mix.value(phi, 0.0), mix.slope_bound() * phi)


def test_charge_mix_validation():
    with pytest.raises(ValueError):
        ChargeMixProfile(())
    with pytest.raises(ValueError):
        ChargeMixProfile(((1.0, 0.4), (2.0, 0.4)))
    with pytest.raises(ValueError):
        ChargeMixProfile(((-1.0, 1.0),))


def test_profile_from_config_round_trip():
    for cfg, cls in (
        ({"potential": "linear"}, LinearProfile),
        ({"potential": "widom_rowlinson"}, WidomRowlinsonProfile),
        ({"potential": "charge_mix", "charges": [[1.0, 0.5], [2.0, 0.5]]}, ChargeMixProfile),
    ):
        assert isinstance(profile_from_config(cfg), cls)
    with pytest.raises(ValueError):
        profile_from_config({"potential": "other"})


def test_energy_and_papangelou_bounds(wr_spec6):
    assert wr_spec6.b == 1.0
    assert wr_spec6.l1 == pytest.approx(math.sqrt(math.pi), rel=1e-9)
    assert wr_spec6.energy_bound == pytest.approx(math.sqrt(math.pi), rel=1e-9)
    assert wr_spec6.papangelou_bound == pytest.approx(math.exp(math.sqrt(math.pi)), rel=1e-9)
    # One-sided: energies are nonnegative, so thinned densities stay below one.
    assert wr_spec6.density_growth == pytest.approx(1.0)


def test_linear_single_point_energy_is_kernel_mass(wr_spec6):
    """For v(t)=t the energy of one bulk point is the kernel integral sqrt(pi)."""
    window = box_window(euclidean(1), [(0.0, 6.0)])
    spec = PotentialSpec.build(LinearProfile(), GaussianKernel(1), 1.0, window)
    eta = Configuration(np.array([[3.0]]))
    defect = spec.grid_l1_defect()
    assert potential(spec, eta) == pytest.approx(
        math.sqrt(math.pi), abs=10 * defect + 1e-9
    )


def test_overlap_energy_matches_adaptive_quadrature(wr_spec6):
    """Grid energy of a two-point configuration vs scipy adaptive quadrature.

    The energy integrates over all of space (the window only confines the
    points), so the reference value is the adaptive integral over the padded
    range the grid covers, which carries the full-space value to below 1e-8.
    """
    pts = np.array([[2.4], [3.1]])
    eta = Configuration(pts)

    def integrand(u: float) -> float:
        phi = sum(math.exp(-((u - p[0]) ** 2)) for p in pts)
        return 1.0 - math.exp(-phi)

    pad = wr_spec6.grid.pad
    want, err = quad(
        integrand, -pad, 6.0 + pad, limit=400, epsabs=1e-12, points=[2.4, 3.1]
    )
    got = potential(wr_spec6, eta)
    assert err < 1e-10
    assert got == pytest.approx(want, abs=1e-7)


def test_empty_configuration_has_zero_energy(wr_spec6):
    assert potential(wr_spec6, empty(1)) == 0.0


def test_energy_diff_consistency(wr_spec6):
    eta = Configuration(np.array([[2.0], [4.0]]))
    x = np.array([3.0])
    direct = potential(wr_spec6, eta.add(x)) - potential(wr_spec6, eta)
    assert energy_diff(wr_spec6, x, eta) == pytest.approx(direct, abs=1e-12)


def test_papangelou_attractive_ordering(wr_spec6):
    """Insertion gets cheaper (factor larger) as the configuration grows."""
    rng = np.random.default_rng(8)
    for _ in range(25):
        n = rng.integers(0, 4)
        eta = Configuration(rng.uniform(0.0, 6.0, (n, 1)))
        gamma = Configuration(
            np.vstack([eta.points, rng.uniform(0.0, 6.0, (2, 1))])
        )
        x = rng.uniform(0.0, 6.0, 1)
        small = papangelou(wr_spec6, x, eta)
        big = papangelou(wr_spec6, x, gamma)
        assert big >= small - 1e-12
        assert small <= wr_spec6.papangelou_bound + 1e-12


def test_verify_conditions_overlap(wr_spec6):
    rep = verify_conditions(wr_spec6, trials=300, rng=np.random.default_rng(3))
    assert rep.ok
    assert rep.worst_stability_margin <= 0
    assert rep.worst_upper_margin <= 0
    assert rep.worst_monotonicity_margin <= 0


def test_verify_conditions_linear_and_mix():
    window = box_window(euclidean(1), [(0.0, 4.0)])
    for profile in (
        LinearProfile(),
        ChargeMixProfile(((0.5, 0.3), (1.0, 0.4), (2.0, 0.3))),
    ):
        spec = PotentialSpec.build(profile, GaussianKernel(1), 0.8, window)
        rep = verify_conditions(spec, trials=200, rng=np.random.default_rng(17))
        assert rep.ok, rep.to_jsonable()


def test_verify_conditions_report_jsonable(wr_spec6):
    rep = verify_conditions(wr_spec6, trials=20, rng=np.random.default_rng(1))
    data = rep.to_jsonable()
    assert data["ok"] is True
    assert data["trials"] == 20


def test_grid_l1_defect_small(wr_spec6):
    assert wr_spec6.grid_l1_defect() < 1e-8


def test_spec_config_round_trip(wr_spec6):
    cfg = wr_spec6.config()
    profile = profile_from_config(cfg)
    assert isinstance(profile, WidomRowlinsonProfile)
    assert cfg["beta"] == 1.0


def test_negative_beta_rejected():
    window = box_window(euclidean(1), [(0.0, 1.0)])
    with pytest.raises(ValueError):
        PotentialSpec.build(WidomRowlinsonProfile(), GaussianKernel(1), -0.5, window)
