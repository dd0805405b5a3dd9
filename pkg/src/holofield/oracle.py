"""Exact small-volume expectations by truncated reference-measure series.

For a window of reference mass ``sigma`` and density ``exp(-beta U)`` the
expectation of a functional ``F`` is the ratio of two rapidly converging
series

    E[F] = ( sum_n  1/n!  Int_{window^n} F exp(-beta U) dsigma^n )
           / ( same with F = 1 ),

each ``n``-term evaluated by a symmetrized tensor Gauss-Legendre rule.  The
reported error has three parts: the truncation tail (computed from the
declared growth of ``F`` and the one-sided density bound), a quadrature
estimate (difference against an embedded coarser rule), and — where a second
internal series appears — an accumulation bound.

The same machinery computes analytically continued moments (``moment_exact``)
and the two-species comparison behind the charge-mixture models.  For the
noninteracting case, :func:`campbell_moment` provides independent closed-ish
forms via moment formulas of the Poisson process (sums over set partitions
of single integrals), usable on the full space where no window breaks the
symmetries.
"""

from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .configurations import TestFunction
from .geometry import Window
from .interaction import ChargeMixProfile, PotentialSpec

__all__ = [
    "OracleTailError",
    "OracleValue",
    "SeriesSpec",
    "Functional",
    "count_functional",
    "count_in_box",
    "laplace_functional",
    "field_at",
    "moment_functional",
    "product_of_counts",
    "expect",
    "moment_exact",
    "campbell_moment",
    "poisson_laplace",
    "two_species_projection_check",
    "potts_pair_identity",
]


class OracleTailError(ValueError):
    """Requested truncation cannot meet the tail tolerance."""

    def __init__(self, message: str, required_nmax: int | None = None):
        super().__init__(message)
        self.required_nmax = required_nmax


@dataclasses.dataclass(frozen=True)
class OracleValue:
    """Series value with its certified error decomposition."""

    value: complex | float
    tail_bound: float
    quad_bound: float
    nmax: int
    extra_bound: float = 0.0

    @property
    def total_bound(self) -> float:
        return self.tail_bound + self.quad_bound + self.extra_bound

    def to_jsonable(self) -> dict:
        v = self.value
        out = {
            "tail_bound": self.tail_bound,
            "quad_bound": self.quad_bound,
            "nmax": self.nmax,
        }
        if isinstance(v, complex):
            out["value"] = {"re": v.real, "im": v.imag}
        else:
            out["value"] = v
        return out


class Functional:
    """A configuration functional with a declared growth envelope.

    ``eval_batch`` receives a stack of same-size configurations with shape
    ``(m, n, d)`` and returns ``(m,)`` values; ``growth(n)`` bounds ``|F|``
    over all ``n``-point configurations in the window and feeds the
    truncation-tail computation.
    """

    name = "functional"

    def eval_batch(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def growth(self, n: int) -> float:
        raise NotImplementedError


@dataclasses.dataclass(frozen=True)
class count_functional(Functional):
    name: str = "count"

    def eval_batch(self, pts):
        return np.full(pts.shape[0], float(pts.shape[1]))

    def growth(self, n):
        return float(n)


@dataclasses.dataclass(frozen=True)
class count_in_box(Functional):
    bounds: tuple
    name: str = "count_in_box"

    def eval_batch(self, pts):
        b = np.asarray(self.bounds, dtype=float)
        inside = np.all((pts >= b[:, 0]) & (pts <= b[:, 1]), axis=2)
        return inside.sum(axis=1).astype(float)

    def growth(self, n):
        return float(n)


@dataclasses.dataclass(frozen=True)
class product_of_counts(Functional):
    bounds_a: tuple
    bounds_b: tuple
    name: str = "product_of_counts"

    def eval_batch(self, pts):
        out = np.ones(pts.shape[0])
        for b in (self.bounds_a, self.bounds_b):
            bb = np.asarray(b, dtype=float)
            inside = np.all((pts >= bb[:, 0]) & (pts <= bb[:, 1]), axis=2)
            out = out * inside.sum(axis=1)
        return out

    def growth(self, n):
        return float(n) ** 2


@dataclasses.dataclass(frozen=True)
class laplace_functional(Functional):
    h: TestFunction
    scale: float = 1.0
    name: str = "laplace"

    def eval_batch(self, pts):
        m, n, d = pts.shape
        if n == 0:
            return np.ones(m)
        vals = self.h(pts.reshape(m * n, d)).reshape(m, n)
        return np.exp(-self.scale * vals.sum(axis=1))

    def growth(self, n):
        return 1.0


@dataclasses.dataclass(frozen=True)
class field_at(Functional):
    """Real field value ``(G * eta)(x0)`` at a fixed real location."""

    kernel: object
    x0: tuple
    name: str = "field_at"

    def eval_batch(self, pts):
        m, n, d = pts.shape
        if n == 0:
            return np.zeros(m)
        x0 = np.asarray(self.x0, dtype=float)[None, :]
        rows = self.kernel.eval_points(pts.reshape(m * n, d), x0)[:, 0]
        return rows.reshape(m, n).sum(axis=1)

    def growth(self, n):
        return float(n) * _sup_row(self.kernel, np.asarray(self.x0, dtype=complex))


class moment_functional(Functional):
    """Product ``prod_i phi^c(z_i)`` with optional conjugation per factor."""

    name = "moment"

    def __init__(self, kernel, zs, conj):
        self.kernel = kernel
        self.zs = [np.asarray(z, dtype=complex).reshape(-1) for z in zs]
        self.conj = list(conj)
        if len(self.conj) != len(self.zs):
            raise ValueError("one conjugation flag per point required")
        self._sups = [_sup_row(kernel, z) for z in self.zs]

    def eval_batch(self, pts):
        m, n, d = pts.shape
        if n == 0:
            # the field of the empty configuration vanishes identically
            return np.zeros(m, dtype=complex)
        flat = pts.reshape(m * n, d)
        out = np.ones(m, dtype=complex)
        for z, cj in zip(self.zs, self.conj):
            vals = self.kernel.eval_complex(z, flat).reshape(m, n).sum(axis=1)
            out = out * (np.conj(vals) if cj else vals)
        return out

    def growth(self, n):
        out = 1.0
        for s in self._sups:
            out *= n * s
        return out


def _sup_row(kernel, z: np.ndarray) -> float:
    """Bound on ``sup_x |G^c(z, x)|`` over real x (kernel-specific)."""
    kname = type(kernel).__name__
    if kname == "GaussianKernel":
        return float(np.exp(np.sum(z.imag**2)))
    if kname == "SphereExpKernel":
        r = kernel.radius
        return float(np.exp(r * np.linalg.norm(np.abs(z))))
    # Mollified kernels attain their maximum modulus on the imaginary axis.
    w = (1j * np.abs(z.imag))[None, :]
    return float(abs(kernel._eval_diff(w)[0])) * 1.01


# -- series machinery --------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class SeriesSpec:
    """Truncated-series oracle for a small window.

    quad_nodes is the Gauss-Legendre node count per axis for the terms with
    up to four points; deeper terms use a geometrically thinned schedule.
    ``axis_splits`` lists interior cut points per axis; the rule is then
    composite over the resulting panels, which keeps region-count
    functionals with matching boundaries exactly integrable.
    """

    potential: PotentialSpec
    intensity: float = 1.0
    nmax: int = 12
    quad_nodes: int = 32
    tail_tol: float = 1e-8
    axis_splits: tuple = ()

    def __post_init__(self):
        if self.intensity <= 0:
            raise ValueError("intensity must be positive")
        if self.nmax < 0 or self.nmax > 40:
            raise ValueError("nmax out of range")
        object.__setattr__(self, "_cache", {})
        tail = _tail_series(self.sigma_total * self.potential.density_growth, self.nmax)
        if tail > self.tail_tol:
            raise OracleTailError(
                f"normalization tail {tail:.3e} exceeds tolerance {self.tail_tol:g}",
                required_nmax=_required_nmax(
                    self.sigma_total * self.potential.density_growth,
                    lambda n: 1.0,
                    self.tail_tol,
                ),
            )

    @property
    def sigma_total(self) -> float:
        return self.intensity * self.potential.window.volume

    def nodes_for(self, n: int) -> int:
        if n <= 4:
            return self.quad_nodes
        return max(4, int(self.quad_nodes * (4.0 / n) ** 1.7))


def _tail_series(rate: float, nmax: int, growth=None, terms: int = 80) -> float:
    """``sum_{n > nmax} growth(n) rate^n / n!`` summed to convergence."""
    total = 0.0
    for n in range(nmax + 1, nmax + 1 + terms):
        log_term = n * math.log(rate) - math.lgamma(n + 1) if rate > 0 else -math.inf
        g = growth(n) if growth else 1.0
        total += g * math.exp(log_term)
    return total


def _required_nmax(rate: float, growth, tol: float) -> int:
    for n in range(1, 200):
        if _tail_series(rate, n, growth) <= tol:
            return n
    raise OracleTailError("tail tolerance unreachable below nmax=200")


def _axis_rule(window: Window, q: int, axis_splits: tuple = ()):
    """Per-point node positions and weights: tensor GL over the window box.

    With splits the per-axis rule is composite: ``q`` nodes are distributed
    over the panels proportionally to length (at least 4 per panel).
    """
    axes_nodes = []
    axes_weights = []
    for axis, (lo, hi) in enumerate(window.bounds):
        cuts = sorted(axis_splits[axis]) if axis < len(axis_splits) else []
        edges = [lo] + [c for c in cuts if lo < c < hi] + [hi]
        total = hi - lo
        nodes_parts, weight_parts = [], []
        for a, b in zip(edges, edges[1:]):
            qp = max(2, int(round(q * (b - a) / total)))
            x, w = leggauss(qp)
            nodes_parts.append(0.5 * (b + a) + 0.5 * (b - a) * x)
            weight_parts.append(0.5 * (b - a) * w)
        axes_nodes.append(np.concatenate(nodes_parts))
        axes_weights.append(np.concatenate(weight_parts))
    mesh = np.meshgrid(*axes_nodes, indexing="ij")
    wmesh = np.meshgrid(*axes_weights, indexing="ij")
    nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
    weights = np.prod(np.stack([m.reshape(-1) for m in wmesh], axis=1), axis=1)
    return nodes, weights


def _symmetric_configs(n: int, n_nodes: int):
    """Sorted index tuples and their multiplicity divisors for n points."""
    combos = list(itertools.combinations_with_replacement(range(n_nodes), n))
    idx = np.array(combos, dtype=np.int64).reshape(len(combos), n)
    divisors = np.empty(len(combos))
    for i, combo in enumerate(combos):
        div = 1.0
        run = 1
        for a, b in zip(combo, combo[1:]):
            run = run + 1 if a == b else 1
            div *= run if a == b else 1
        divisors[i] = div
    return idx, divisors


def _term_data(spec: SeriesSpec, n: int, q: int):
    """Points, combined weights, and densities of the n-point series term."""
    key = (n, q)
    cache = spec._cache
    if key in cache:
        return cache[key]
    pot = spec.potential
    if n == 0:
        data = (np.empty((1, 0, pot.window.space.ambient_dim)), np.ones(1), np.ones(1))
        cache[key] = data
        return data
    nodes, node_w = _axis_rule(pot.window, q, spec.axis_splits)
    idx, div = _symmetric_configs(n, nodes.shape[0])
    pts = nodes[idx]  # (m, n, d)
    weights = spec.intensity**n * np.prod(node_w[idx], axis=1) * (
        math.factorial(n) / div
    ) / math.factorial(n)
    density = _density_batch(pot, pts)
    data = (pts, weights, density)
    cache[key] = data
    return data


def _density_batch(pot: PotentialSpec, pts: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """``exp(-beta U)`` for a stack of same-size configurations."""
    m, n, d = pts.shape
    if pot.beta == 0.0 or n == 0:
        return np.ones(m)
    gw = pot.grid.weights
    out = np.empty(m)
    for start in range(0, m, chunk):
        block = pts[start : start + chunk]
        mb = block.shape[0]
        # rows has shape (ng, mb*n); regroup and sum the n kernel rows.
        rows = pot.kernel.eval_points(pot.grid.nodes, block.reshape(mb * n, d))
        ng = pot.grid.nodes.shape[0]
        phi = rows.reshape(ng, mb, n).sum(axis=2)  # (ng, mb)
        vals = pot.profile.value(phi, pot.beta)
        out[start : start + mb] = np.exp(-pot.beta * (gw @ vals))
    return out


def _series_terms(spec: SeriesSpec, functional: Functional, coarse: bool = False):
    """Per-n numerator terms and normalization terms."""
    nums = np.zeros(spec.nmax + 1, dtype=complex)
    zs = np.zeros(spec.nmax + 1)
    for n in range(spec.nmax + 1):
        q = spec.nodes_for(n)
        if coarse:
            q = max(3, q // 2 + 1)
        pts, weights, density = _term_data(spec, n, q)
        fvals = functional.eval_batch(pts)
        nums[n] = np.sum(weights * density * fvals)
        zs[n] = np.sum(weights * density)
    return nums, zs


def _ratio_with_bounds(spec, functional, extra_bound: float = 0.0) -> OracleValue:
    rate = spec.sigma_total * spec.potential.density_growth
    tail_num = _tail_series(rate, spec.nmax, functional.growth)
    tail_z = _tail_series(rate, spec.nmax)
    if tail_num > spec.tail_tol:
        raise OracleTailError(
            f"functional tail {tail_num:.3e} exceeds tolerance {spec.tail_tol:g}; "
            "increase nmax",
            required_nmax=_required_nmax(rate, functional.growth, spec.tail_tol),
        )
    nums, zs = _series_terms(spec, functional)
    nums_c, zs_c = _series_terms(spec, functional, coarse=True)
    z = float(np.sum(zs))
    value = complex(np.sum(nums)) / z
    quad = (abs(np.sum(nums - nums_c)) + abs(value) * abs(float(np.sum(zs - zs_c)))) / z
    tail = (tail_num + abs(value) * tail_z) / max(z - tail_z, 1e-300)
    if not isinstance(functional, moment_functional):
        value = value.real
    return OracleValue(value, tail, quad, spec.nmax, extra_bound)


def expect(spec: SeriesSpec, functional: Functional) -> OracleValue:
    """Expectation of ``functional`` under the interacting model."""
    return _ratio_with_bounds(spec, functional)


def moment_exact(spec: SeriesSpec, zs, conj) -> OracleValue:
    """Analytically continued moment ``E[prod_i phi~(z_i)]`` by series."""
    if len(zs) == 0:
        return OracleValue(1.0 + 0.0j, 0.0, 0.0, spec.nmax)
    return expect(spec, moment_functional(spec.potential.kernel, zs, conj))


# -- Poisson closed forms -----------------------------------------------------


def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1 :]
        yield [[first]] + part


def _gl_box(bounds: np.ndarray, q: int):
    x, w = leggauss(q)
    nodes_ax, weights_ax = [], []
    for lo, hi in bounds:
        nodes_ax.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
        weights_ax.append(0.5 * (hi - lo) * w)
    mesh = np.meshgrid(*nodes_ax, indexing="ij")
    wmesh = np.meshgrid(*weights_ax, indexing="ij")
    nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
    weights = np.prod(np.stack([m.reshape(-1) for m in wmesh], axis=1), axis=1)
    return nodes, weights


def campbell_moment(
    kernel,
    zs,
    conj,
    intensity: float = 1.0,
    box=None,
    nodes: int = 96,
    pad: float = 8.0,
) -> complex:
    """Poisson moment ``E[prod_i phi~(z_i)]`` via set-partition formulas.

    With no ``box`` the integration region covers the real parts of all
    points padded by ``pad`` per side, approximating the full space (exact
    up to Gaussian-tail mass for decaying kernels); passing a box restricts
    the reference measure to a window.
    """
    zs = [np.asarray(z, dtype=complex).reshape(-1) for z in zs]
    conj = list(conj)
    n = len(zs)
    if n == 0:
        return 1.0 + 0.0j
    d = zs[0].shape[0]
    if box is None:
        res = np.array([z.real for z in zs])
        box = np.stack([res.min(axis=0) - pad, res.max(axis=0) + pad], axis=1)
    else:
        box = np.asarray(box, dtype=float)
    gl_nodes, gl_weights = _gl_box(box, nodes)
    factors = []
    for z, cj in zip(zs, conj):
        vals = kernel.eval_complex(z, gl_nodes)
        factors.append(np.conj(vals) if cj else vals)
    total = 0.0 + 0.0j
    for part in _set_partitions(list(range(n))):
        prod = 1.0 + 0.0j
        for block in part:
            integrand = np.ones(gl_nodes.shape[0], dtype=complex)
            for j in block:
                integrand = integrand * factors[j]
            prod *= intensity * complex(np.dot(gl_weights, integrand))
        total += prod
    return total


def poisson_laplace(window: Window, h: TestFunction, intensity: float = 1.0, nodes: int = 64) -> float:
    """Closed form ``exp( Int (e^-h - 1) dsigma )`` for the Poisson process."""
    gl_nodes, gl_weights = _gl_box(window.bounds, nodes)
    vals = np.expm1(-h(gl_nodes))
    return float(np.exp(intensity * np.dot(gl_weights, vals)))


# -- two-species comparison ---------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ProjectionReport:
    """Outcome of the coupled-measure vs charge-mixture comparison."""

    names: tuple
    coupled: tuple
    single: tuple
    bounds: tuple

    @property
    def ok(self) -> bool:
        return all(
            abs(a - b) <= c for a, b, c in zip(self.coupled, self.single, self.bounds)
        )


def _coupled_density(spec: SeriesSpec, pts: np.ndarray, m_terms: int = 80):
    """Weight of the first species after integrating out the charged one.

    The second species is a charge-marked Poisson process on the field
    window; integrating ``exp(-beta <gamma, G * eta>)`` over it yields
    ``exp(J)`` with ``J = Int (Ehat(beta H) - 1)``, computed here as an
    explicit exponential series (the second Poisson expansion), on an
    independent Gauss-Legendre rule.  Returns the weights and an
    accumulation bound for the series evaluation.
    """
    pot = spec.potential
    profile = pot.profile
    assert isinstance(profile, ChargeMixProfile)
    m, n, d = pts.shape
    if n == 0:
        return np.ones(m), 0.0
    pad = pot.grid.pad
    box = np.stack(
        [pot.window.bounds[:, 0] - pad, pot.window.bounds[:, 1] + pad], axis=1
    )
    gl_nodes, gl_weights = _gl_box(box, 64 if d == 1 else 48)
    rows = pot.kernel.eval_points(gl_nodes, pts.reshape(m * n, d))
    ng = gl_nodes.shape[0]
    hfield = rows.reshape(ng, m, n).sum(axis=2)  # (ng, m): H_eta at B-nodes
    ehat = np.zeros_like(hfield)
    for s, w in profile.charges:
        ehat += w * np.exp(-s * pot.beta * hfield)
    j = gl_weights @ (ehat - 1.0)  # (m,), <= 0
    # exp(J) via its power series: the second (species) expansion made explicit.
    term = np.ones(m)
    total = np.ones(m)
    max_term = np.ones(m)
    for k in range(1, m_terms + 1):
        term = term * j / k
        total += term
        np.maximum(max_term, np.abs(term), out=max_term)
    jmax = float(np.max(np.abs(j))) if m else 0.0
    tail = jmax ** (m_terms + 1) / math.factorial(m_terms + 1) * math.exp(jmax)
    round_off = float(np.max(max_term)) * 1e-16 * m_terms
    return total, tail + round_off


def two_species_projection_check(
    spec: SeriesSpec, h: TestFunction | None = None, x0=None
) -> ProjectionReport:
    """Compare the coupled two-species marginal against the mixture model.

    The coupled measure pairs an unmarked species on the window with a
    charge-marked Poisson species on the field window through the bilinear
    energy ``beta sum_jk s_k G(y_j, x_k)``; its first marginal is exactly
    the charge-mixture model.  Both sides are computed by independent
    series/quadratures for three functionals: total count, a Laplace
    functional, and a field value at the window center.
    """
    pot = spec.potential
    if not isinstance(pot.profile, ChargeMixProfile):
        raise ValueError("projection check applies to charge-mixture models")
    center = pot.window.bounds.mean(axis=1)
    if h is None:
        radius = float(np.min(pot.window.bounds[:, 1] - pot.window.bounds[:, 0])) / 2.0
        h = TestFunction(center, radius, 1.0)
    if x0 is None:
        x0 = tuple(center)
    functionals = [
        count_functional(),
        laplace_functional(h),
        field_at(pot.kernel, tuple(x0)),
    ]
    single_vals = []
    coupled_vals = []
    bounds = []
    rate = spec.sigma_total  # coupled weights are also bounded by one
    for f in functionals:
        single = expect(spec, f)
        single_vals.append(complex(single.value).real)
        nums = np.zeros(spec.nmax + 1)
        zs = np.zeros(spec.nmax + 1)
        series_bound = 0.0
        for n in range(spec.nmax + 1):
            q = spec.nodes_for(n)
            pts, weights, _ = _term_data(spec, n, q)
            wa, acc_bound = _coupled_density(spec, pts)
            fv = f.eval_batch(pts).real
            nums[n] = np.sum(weights * wa * fv)
            zs[n] = np.sum(weights * wa)
            series_bound += acc_bound * float(np.sum(np.abs(weights))) * (
                1.0 + abs(f.growth(max(n, 1)))
            )
        z = float(np.sum(zs))
        val = float(np.sum(nums)) / z
        coupled_vals.append(val)
        tail = (
            _tail_series(rate, spec.nmax, f.growth)
            + abs(val) * _tail_series(rate, spec.nmax)
        ) / z
        bounds.append(single.total_bound + tail + series_bound / z + 1e-9)
    return ProjectionReport(
        tuple(f.name for f in functionals),
        tuple(coupled_vals),
        tuple(single_vals),
        tuple(bounds),
    )


def potts_pair_identity(
    kernel, eta_pts, gamma_pts, gamma_charges, nodes: int = 128, pad: float = 8.0
) -> tuple[float, float]:
    """Both sides of the pair-energy identity for smeared fields.

    Left: ``Int (G * eta)(y) (G * gamma)(y) dy`` by direct quadrature.
    Right: ``sum_j sum_k s_k (G * G)(y_j, x_k)`` in closed form.
    Returns ``(lhs, rhs)``.
    """
    eta_pts = np.atleast_2d(np.asarray(eta_pts, dtype=float))
    gamma_pts = np.atleast_2d(np.asarray(gamma_pts, dtype=float))
    charges = np.asarray(gamma_charges, dtype=float)
    allpts = np.vstack([eta_pts, gamma_pts])
    box = np.stack([allpts.min(axis=0) - pad, allpts.max(axis=0) + pad], axis=1)
    gl_nodes, gl_weights = _gl_box(box, nodes)
    f1 = kernel.eval_points(gl_nodes, eta_pts).sum(axis=1)
    f2 = kernel.eval_points(gl_nodes, gamma_pts) @ charges
    lhs = float(np.dot(gl_weights, f1 * f2))
    conv = kernel.self_convolve(eta_pts, gamma_pts)
    rhs = float(np.real(conv @ charges).sum())
    return lhs, rhs
