"""Interaction energies of the attractive convolution type.

A model is specified by a concave profile ``v`` with ``v(0) = 0`` and
``|v(t)| <= b t``, a nonnegative symmetric kernel ``G``, and an inverse
temperature ``beta >= 0``.  The energy of a finite configuration ``eta`` is

    U(eta) = Int v( (G * eta)(y) ) dy,

evaluated on a fixed quadrature grid that extends beyond the sampling window
by the kernel's decay radius, so that every point of the window sees the full
mass of its kernel row.  All simulation and series code shares this grid, so
the discretized energy *is* the model being simulated and verified.

Key consequences of concavity that the code relies on (and `verify_conditions`
re-checks numerically):

* stability: ``|U(eta)| <= b * C * #eta`` with ``C`` the kernel row mass;
* insertion bound: ``U(eta + x) - U(eta) <= b * C``;
* attractivity: insertion increments decrease as the background grows, so
  the conditional intensity ``exp(-beta * increment)`` is increasing in eta
  and uniformly bounded by ``rho = exp(beta * b * C)``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .configurations import Configuration
from .geometry import Space, Window

__all__ = [
    "VProfile",
    "LinearProfile",
    "WidomRowlinsonProfile",
    "ChargeMixProfile",
    "QuadratureGrid",
    "PotentialSpec",
    "ConditionsReport",
    "potential",
    "energy_diff",
    "papangelou",
    "verify_conditions",
]


class VProfile:
    """Interface of the concave interaction profile."""

    name = "abstract"

    def value(self, phi: np.ndarray, beta: float) -> np.ndarray:
        """``v(phi)`` elementwise (``beta`` enters only for charge mixtures)."""
        raise NotImplementedError

    def slope_bound(self) -> float:
        """The constant ``b`` with ``|v(t)| <= b t``."""
        raise NotImplementedError

    def core_params(self) -> tuple[int, np.ndarray, np.ndarray]:
        """Encoding ``(kind, s, w)`` consumed by the sampling cores."""
        raise NotImplementedError


@dataclasses.dataclass(frozen=True)
class LinearProfile(VProfile):
    """``v(t) = t``: an exactly solvable (independent-thinning) case."""

    name = "linear"

    def value(self, phi, beta):
        return np.asarray(phi, dtype=float)

    def slope_bound(self):
        return 1.0

    def core_params(self):
        return 0, np.ones(1), np.ones(1)


@dataclasses.dataclass(frozen=True)
class WidomRowlinsonProfile(VProfile):
    """``v(t) = 1 - exp(-t)``: area-interaction / overlap suppression."""

    name = "widom_rowlinson"

    def value(self, phi, beta):
        return -np.expm1(-np.asarray(phi, dtype=float))

    def slope_bound(self):
        return 1.0

    def core_params(self):
        return 1, np.ones(1), np.ones(1)


@dataclasses.dataclass(frozen=True)
class ChargeMixProfile(VProfile):
    """Charge-averaged profile ``v(t) = sum_i w_i (1 - exp(-s_i beta t)) / beta``.

    ``charges`` is a sequence of ``(s_i, w_i)`` pairs with positive charge
    values ``s_i`` and probability weights ``w_i`` summing to one.  At
    ``beta = 0`` the profile degenerates to the linear one with slope
    ``b = sum_i w_i s_i``.
    """

    charges: tuple[tuple[float, float], ...]
    name = "charge_mix"

    def __post_init__(self):
        ch = tuple((float(s), float(w)) for s, w in self.charges)
        if not ch:
            raise ValueError("at least one charge required")
        if any(s <= 0 or w <= 0 for s, w in ch):
            raise ValueError("charge values and weights must be positive")
        if abs(sum(w for _, w in ch) - 1.0) > 1e-12:
            raise ValueError("charge weights must sum to one")
        object.__setattr__(self, "charges", ch)

    def value(self, phi, beta):
        phi = np.asarray(phi, dtype=float)
        if beta == 0.0:
            return self.slope_bound() * phi
        acc = np.zeros_like(phi)
        for s, w in self.charges:
            acc -= w * np.expm1(-s * beta * phi)
        return acc / beta

    def slope_bound(self):
        return sum(w * s for s, w in self.charges)

    def core_params(self):
        s = np.array([s for s, _ in self.charges])
        w = np.array([w for _, w in self.charges])
        return 2, s, w


def profile_from_config(cfg: dict) -> VProfile:
    kind = cfg.get("potential", "widom_rowlinson")
    if kind == "widom_rowlinson":
        return WidomRowlinsonProfile()
    if kind == "linear":
        return LinearProfile()
    if kind == "charge_mix":
        charges = cfg.get("charges")
        if not charges:
            raise ValueError("charge_mix requires 'charges': [[s, w], ..]")
        return ChargeMixProfile(tuple((s, w) for s, w in charges))
    raise ValueError(f"unknown potential kind {kind!r}")


@dataclasses.dataclass(frozen=True)
class QuadratureGrid:
    """Integration nodes and weights for the field integral.

    For flat space the grid is a tensor midpoint rule over the sampling
    window padded by ``pad`` on every side; on a sphere it covers the whole
    sphere (Gauss-Legendre in the polar cosine, midpoint in angles), so no
    padding is involved.  Weights sum to the integration volume exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray
    spacing: float
    pad: float

    def __post_init__(self):
        n = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        n.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", n)
        object.__setattr__(self, "weights", w)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    @staticmethod
    def for_window(window: Window, spacing: float, pad: float = 0.0) -> "QuadratureGrid":
        space = window.space
        if space.kind == "euclidean":
            axes = []
            for lo, hi in window.bounds:
                lo_p, hi_p = lo - pad, hi + pad
                count = max(1, int(math.ceil((hi_p - lo_p) / spacing)))
                step = (hi_p - lo_p) / count
                axes.append((lo_p + (np.arange(count) + 0.5) * step, step))
            mesh = np.meshgrid(*[a for a, _ in axes], indexing="ij")
            nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
            cell = float(np.prod([s for _, s in axes]))
            weights = np.full(nodes.shape[0], cell)
            return QuadratureGrid(nodes, weights, spacing, pad)
        r = space.radius
        if space.dim == 1:
            count = max(8, int(math.ceil(2.0 * math.pi * r / spacing)))
            theta = (np.arange(count) + 0.5) * (2.0 * math.pi / count)
            nodes = r * np.stack([np.cos(theta), np.sin(theta)], axis=1)
            weights = np.full(count, 2.0 * math.pi * r / count)
            return QuadratureGrid(nodes, weights, spacing, 0.0)
        if space.dim == 2:
            n_u = max(8, int(math.ceil(math.pi * r / spacing)))
            n_phi = max(8, int(math.ceil(2.0 * math.pi * r / spacing)))
            u, wu = leggauss(n_u)
            phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
            su = np.sqrt(1.0 - u**2)
            x = np.outer(su, np.cos(phi)).reshape(-1)
            y = np.outer(su, np.sin(phi)).reshape(-1)
            z = np.repeat(u, n_phi)
            nodes = r * np.stack([x, y, z], axis=1)
            weights = r**2 * np.repeat(wu, n_phi) * (2.0 * math.pi / n_phi)
            return QuadratureGrid(nodes, weights, spacing, 0.0)
        raise ValueError("sphere grids support dim 1 and 2")


def _default_spacing(dim: int) -> float:
    return 0.05 if dim == 1 else 0.1


@dataclasses.dataclass(frozen=True)
class PotentialSpec:
    """Interaction model: profile + kernel + inverse temperature + grid.

    Derived constants: ``b`` (profile slope bound), ``l1`` (kernel row mass
    ``C``), ``energy_bound = b * C``, ``papangelou_bound = exp(beta * b * C)``.
    """

    profile: VProfile
    kernel: object
    beta: float
    window: Window
    grid: QuadratureGrid

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    @staticmethod
    def build(
        profile: VProfile,
        kernel,
        beta: float,
        window: Window,
        spacing: float | None = None,
        pad_tol: float = 1e-8,
    ) -> "PotentialSpec":
        spacing = spacing or _default_spacing(window.space.dim)
        if window.space.kind == "euclidean":
            pad_raw = kernel.decay_radius(pad_tol)
            pad = math.ceil(pad_raw / spacing) * spacing
        else:
            pad = 0.0
        grid = QuadratureGrid.for_window(window, spacing, pad)
        return PotentialSpec(profile, kernel, beta, window, grid)

    @property
    def b(self) -> float:
        return self.profile.slope_bound()

    @property
    def l1(self) -> float:
        return self.kernel.l1_constant()

    @property
    def energy_bound(self) -> float:
        """Stability constant ``B = b * C`` in ``|U| <= B #eta``."""
        return self.b * self.l1

    @property
    def papangelou_bound(self) -> float:
        return math.exp(self.beta * self.energy_bound)

    @property
    def density_growth(self) -> float:
        """One-sided constant ``xi`` with ``exp(-beta U) <= xi ** #eta``.

        All provided profiles are nonnegative, so energies are nonnegative
        and the density is bounded by one; a negative part of ``v`` would
        contribute ``exp(beta * C * sup max(0, -v(t))/t)``.
        """
        neg = 0.0  # all shipped profiles satisfy v >= 0
        return math.exp(self.beta * self.l1 * neg)

    def grid_field(self, eta: Configuration) -> np.ndarray:
        """Cached-field vector ``Phi(node) = sum_j s_j G(node, x_j)``."""
        if len(eta) == 0:
            return np.zeros(self.grid.nodes.shape[0])
        rows = self.kernel.eval_points(self.grid.nodes, eta.points)
        return rows @ eta.effective_charges()

    def grid_l1_defect(self, probes: int = 5) -> float:
        """Max deviation of the grid row mass from the exact ``C`` at probes.

        This is the per-point, per-unit-slope discretization error of the
        energy; it is reported, not assumed.
        """
        rng = np.random.default_rng(12345)
        pts = self.window.sample_uniform(rng, probes)
        rows = self.kernel.eval_points(self.grid.nodes, pts)
        masses = self.grid.weights @ rows
        return float(np.max(np.abs(masses - self.l1)))

    def config(self) -> dict:
        out = {
            "potential": self.profile.name,
            "beta": self.beta,
            "grid_h": self.grid.spacing,
        }
        if isinstance(self.profile, ChargeMixProfile):
            out["charges"] = [list(c) for c in self.profile.charges]
        out.update(self.kernel.config())
        return out


def potential(spec: PotentialSpec, eta: Configuration) -> float:
    """Total interaction energy ``U(eta)`` on the model grid."""
    if len(eta) == 0:
        return 0.0
    phi = spec.grid_field(eta)
    return float(np.dot(spec.grid.weights, spec.profile.value(phi, spec.beta)))


def energy_diff(spec: PotentialSpec, x, eta: Configuration) -> float:
    """Insertion increment ``U(eta + delta_x) - U(eta)``."""
    phi = spec.grid_field(eta)
    row = spec.kernel.eval_points(spec.grid.nodes, np.asarray(x, dtype=float))[:, 0]
    dv = spec.profile.value(phi + row, spec.beta) - spec.profile.value(phi, spec.beta)
    return float(np.dot(spec.grid.weights, dv))


def papangelou(spec: PotentialSpec, x, eta: Configuration) -> float:
    """Conditional intensity ``exp(-beta * energy_diff)``."""
    return math.exp(-spec.beta * energy_diff(spec, x, eta))


@dataclasses.dataclass
class ConditionsReport:
    """Outcome of randomized checks of the structural interaction bounds."""

    trials: int
    tolerance: float
    stability_violations: int = 0
    upper_bound_violations: int = 0
    monotonicity_violations: int = 0
    worst_stability_margin: float = -math.inf
    worst_upper_margin: float = -math.inf
    worst_monotonicity_margin: float = -math.inf

    @property
    def ok(self) -> bool:
        return (
            self.stability_violations == 0
            and self.upper_bound_violations == 0
            and self.monotonicity_violations == 0
        )

    def to_jsonable(self) -> dict:
        out = dataclasses.asdict(self)
        out["ok"] = self.ok
        # -inf margins mean "never challenged"; JSON needs a finite stand-in
        for key, val in out.items():
            if isinstance(val, float) and not math.isfinite(val):
                out[key] = None
        return out


def verify_conditions(
    spec: PotentialSpec,
    trials: int = 100,
    rng: np.random.Generator | None = None,
    tolerance: float = 1e-6,
    intensity: float = 1.0,
) -> ConditionsReport:
    """Randomized numerical audit of stability, boundedness, attractivity.

    Draws Poisson configurations and nested extensions and checks, up to
    ``tolerance``:  ``|U(eta)| <= B #eta``;  ``papangelou <= exp(beta B)``;
    and that insertion increments do not increase along nested pairs
    ``eta <= gamma``.  Margins are signed (positive = violation).
    """
    rng = rng or np.random.default_rng(0)
    rep = ConditionsReport(trials=trials, tolerance=tolerance)
    bound = spec.energy_bound
    rho = spec.papangelou_bound
    for _ in range(trials):
        n = rng.poisson(intensity * spec.window.volume)
        eta = Configuration(spec.window.sample_uniform(rng, n))
        extra = 1 + rng.poisson(1.0)
        gamma_pts = np.vstack(
            [eta.points, spec.window.sample_uniform(rng, extra).reshape(extra, -1)]
        )
        gamma = Configuration(gamma_pts)
        x = spec.window.sample_uniform(rng, 1)[0]

        u = potential(spec, eta)
        margin = abs(u) - bound * len(eta) - tolerance
        rep.worst_stability_margin = max(rep.worst_stability_margin, margin)
        if margin > 0:
            rep.stability_violations += 1

        d_eta = energy_diff(spec, x, eta)
        d_gamma = energy_diff(spec, x, gamma)
        p_eta = math.exp(-spec.beta * d_eta)
        margin = p_eta - rho - tolerance
        rep.worst_upper_margin = max(rep.worst_upper_margin, margin)
        if margin > 0:
            rep.upper_bound_violations += 1

        # Concavity: the increment against the larger configuration is smaller.
        margin = d_gamma - d_eta - tolerance
        rep.worst_monotonicity_margin = max(rep.worst_monotonicity_margin, margin)
        if margin > 0:
            rep.monotonicity_violations += 1
    return rep
