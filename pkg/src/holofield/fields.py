"""Convolution fields and Monte Carlo estimators for their moments.

A configuration ``eta`` induces the field ``phi = G * eta``; its pathwise
analytic extension ``phi^c(z) = sum_j G^c(z, x_j)`` is what all moment
estimators evaluate.  Moment products at real points estimate the Euclidean
moment functions; the same products at complexified (e.g. imaginary-time)
points estimate their analytic continuations and the mixed
conjugated/unconjugated variants.

Estimators consume a sample stream once, in order, and report batch-means
standard errors.  For invariance comparisons the paired estimators evaluate
both point tuples on the *same* stream, so the difference of strongly
correlated products benefits from variance cancellation.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .configurations import TestFunction
from .sampler import SampleSet
from .stats import batch_means, batch_means_complex, neumaier_sum

__all__ = [
    "CorrelationEstimate",
    "field_complex",
    "canonical_point_order",
    "estimate_moment",
    "estimate_functional",
    "estimate_laplace",
    "paired_moment_difference",
    "moment_bound_check",
]


@dataclasses.dataclass(frozen=True)
class CorrelationEstimate:
    """Monte Carlo moment value with batch-means error bars."""

    value: complex
    stderr_re: float
    stderr_im: float
    n_samples: int
    meta: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if not (
            np.isfinite(self.stderr_re)
            and np.isfinite(self.stderr_im)
            and np.isfinite(complex(self.value))
        ):
            raise ValueError("estimate must be finite")
        if self.stderr_re < 0 or self.stderr_im < 0:
            raise ValueError("standard errors must be nonnegative")

    @property
    def stderr(self) -> float:
        return math.hypot(self.stderr_re, self.stderr_im)

    def to_jsonable(self) -> dict:
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "stderr_re": self.stderr_re,
            "stderr_im": self.stderr_im,
            "n_samples": self.n_samples,
            "meta": self.meta,
        }


def field_complex(points, kernel, z, charges=None) -> complex:
    """Pathwise analytic field ``sum_j s_j G^c(z, x_j)`` of one configuration.

    ``points`` may be a ``Configuration`` or a plain ``(n, d)`` array; the
    empty configuration gives 0.  Restricted to real ``z`` this is the plain
    convolution field.
    """
    pts = np.asarray(getattr(points, "points", points), dtype=float)
    if charges is None:
        charges = getattr(points, "charges", None)
    if pts.size == 0:
        return 0.0 + 0.0j
    vals = kernel.eval_complex(z, pts)
    if charges is not None:
        vals = vals * np.asarray(charges, dtype=float)
    return complex(neumaier_sum(vals.real) + 1j * neumaier_sum(vals.imag))


def canonical_point_order(zs, conj):
    """Deterministic ordering of (point, conjugation) pairs.

    Sorting the factors before evaluation makes the estimator exactly
    symmetric under permutations of its arguments: the same multiplications
    happen in the same order, bit for bit.
    """
    zs = [np.asarray(z, dtype=complex).reshape(-1) for z in zs]
    conj = [bool(c) for c in conj]
    if len(zs) != len(conj):
        raise ValueError("one conjugation flag per point required")
    keys = [
        (c,) + tuple(x for zi in z for x in (zi.real, zi.imag))
        for z, c in zip(zs, conj)
    ]
    order = sorted(range(len(zs)), key=keys.__getitem__)
    return [zs[i] for i in order], [conj[i] for i in order]


def _segments(samples: SampleSet):
    """Concatenated points plus cumulative offsets of a sample stream."""
    counts = np.array([p.shape[0] for p in samples.points], dtype=np.int64)
    dim = samples.dim
    if counts.sum() == 0:
        flat = np.empty((0, dim))
    else:
        flat = np.concatenate([p.reshape(-1, dim) for p in samples.points], axis=0)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    return flat, offsets


def _segment_sums(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    css = np.concatenate([[0.0 + 0.0j], np.cumsum(values)])
    return css[offsets[1:]] - css[offsets[:-1]]


def moment_series(samples: SampleSet, kernel, zs, conj) -> np.ndarray:
    """Per-sample products ``prod_i [conj?] phi^c(z_i)`` in canonical order."""
    zs, conj = canonical_point_order(zs, conj)
    flat, offsets = _segments(samples)
    n_samples = len(samples.points)
    prod = np.ones(n_samples, dtype=complex)
    for z, cj in zip(zs, conj):
        if flat.shape[0]:
            vals = kernel.eval_complex(z, flat)
        else:
            vals = np.empty(0, dtype=complex)
        phi = _segment_sums(vals, offsets)
        prod = prod * (np.conj(phi) if cj else phi)
    return prod


def estimate_moment(
    samples: SampleSet, kernel, zs, conj=None, n_batches: int = 32, meta=None
) -> CorrelationEstimate:
    """Sample-mean estimator of ``E[prod_i [conj?] phi^c(z_i)]``.

    With all flags false and real points this estimates the Euclidean moment
    functions; at imaginary-time points it estimates their Wick-rotated
    counterparts.  The factor order is canonicalized, so permuting the
    (points, flags) input leaves the result bit-identical.
    """
    if conj is None:
        conj = [False] * len(zs)
    if len(zs) == 0:
        return CorrelationEstimate(1.0 + 0.0j, 0.0, 0.0, len(samples.points), meta or {})
    series = moment_series(samples, kernel, zs, conj)
    value, se_re, se_im = batch_means_complex(series, n_batches)
    info = dict(meta or {})
    info.update(
        {
            "points": [[(zi.real, zi.imag) for zi in np.atleast_1d(np.asarray(z, dtype=complex))] for z in zs],
            "conj": [bool(c) for c in conj],
        }
    )
    return CorrelationEstimate(value, se_re, se_im, len(samples.points), info)


def estimate_functional(
    samples: SampleSet, fn, n_batches: int = 32, meta=None
) -> CorrelationEstimate:
    """Mean of an arbitrary per-configuration functional ``fn(points)``."""
    series = np.array([float(fn(p)) for p in samples.points])
    value, se = batch_means(series, n_batches)
    return CorrelationEstimate(
        complex(value), se, 0.0, len(samples.points), dict(meta or {})
    )


def laplace_series(samples: SampleSet, h: TestFunction, scale: float = 1.0):
    flat, offsets = _segments(samples)
    vals = h(flat) if flat.shape[0] else np.empty(0)
    sums = np.real(_segment_sums(vals.astype(complex), offsets))
    return np.exp(-scale * sums)


def estimate_laplace(
    samples: SampleSet, h: TestFunction, scale: float = 1.0, n_batches: int = 32
) -> CorrelationEstimate:
    """Mean of ``exp(-<eta, scale*h>)`` over the stream; values lie in (0, 1]."""
    series = laplace_series(samples, h, scale)
    value, se = batch_means(series, n_batches)
    return CorrelationEstimate(
        complex(value), se, 0.0, len(samples.points), {"height": h.height, "scale": scale}
    )


def paired_moment_difference(
    samples: SampleSet, kernel, zs_a, conj_a, zs_b, conj_b, n_batches: int = 32
) -> CorrelationEstimate:
    """Estimate ``E[prod_a] - E[prod_b]`` with both products on each sample.

    The per-sample difference is variance-reduced when the two point tuples
    are close (e.g. a configuration and its boosted image), which is what
    invariance tests need: the stderr scales with the *difference*
    fluctuations, not with the moment magnitude.
    """
    series = moment_series(samples, kernel, zs_a, conj_a) - moment_series(
        samples, kernel, zs_b, conj_b
    )
    value, se_re, se_im = batch_means_complex(series, n_batches)
    return CorrelationEstimate(value, se_re, se_im, len(samples.points), {})


# -- a-priori moment bound ----------------------------------------------------


def _box_grid(box, per_axis: int = 9):
    """Grid over a complex box ``[(re_lo, re_hi, im_lo, im_hi)] * dim``."""
    axes = []
    for re_lo, re_hi, im_lo, im_hi in box:
        res = np.linspace(re_lo, re_hi, per_axis)
        ims = np.linspace(im_lo, im_hi, per_axis)
        axes.append((res[:, None] + 1j * ims[None, :]).reshape(-1))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _g_envelope(kernel, box, x: np.ndarray) -> np.ndarray:
    """Upper bound on ``sup_{z in box} |G^c(z, x)|`` for real points ``x``.

    Exact for the squared-exponential kernel (factorized sup over the real
    and imaginary parts); other kernels use a grid maximum inflated by a
    safety factor.
    """
    box = np.asarray(box, dtype=float)
    if type(kernel).__name__ == "GaussianKernel":
        im_max2 = np.max(box[:, 2:] ** 2, axis=1)  # per-axis sup of Im(z)^2
        lo, hi = box[:, 0], box[:, 1]
        dist = np.maximum(0.0, np.maximum(lo[None, :] - x, x - hi[None, :]))
        return np.exp(np.sum(im_max2) - np.sum(dist**2, axis=1))
    zgrid = _box_grid(box, per_axis=13)
    out = np.zeros(x.shape[0])
    for z in zgrid:
        np.maximum(out, np.abs(kernel.eval_complex(z, x)), out=out)
    return out * 1.1


def moment_bound_check(
    samples: SampleSet,
    kernel,
    box,
    n: int,
    papangelou_bound: float,
    n_batches: int = 32,
) -> dict:
    """Check ``E[sup_K |phi^c|^n]`` against its explicit a-priori bound.

    ``box`` lists per-axis ``(re_lo, re_hi, im_lo, im_hi)`` rectangles whose
    product is the compact set K.  The empirical mean uses the envelope
    ``g_K`` summed over each configuration (an upper bound for
    ``sup_K |phi^c|``), and the theoretical ceiling is
    ``n! * exp(rho * R * Int g_K)`` with ``R = T e^T``, ``T = sup g_K``.
    """
    box = np.asarray(box, dtype=float)
    flat, offsets = _segments(samples)
    if flat.shape[0]:
        genv = _g_envelope(kernel, box, flat)
    else:
        genv = np.empty(0)
    per_sample = np.real(_segment_sums(genv.astype(complex), offsets)) ** n
    mean, se = batch_means(per_sample, n_batches)
    # integral of the envelope over a padded real box, by Gauss-Legendre
    pad = kernel.decay_radius(1e-12) if hasattr(kernel, "decay_radius") else 10.0
    glx, glw = leggauss(64)
    nodes_ax, weights_ax = [], []
    for re_lo, re_hi, _, _ in box:
        lo, hi = re_lo - pad, re_hi + pad
        nodes_ax.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * glx)
        weights_ax.append(0.5 * (hi - lo) * glw)
    mesh = np.meshgrid(*nodes_ax, indexing="ij")
    wmesh = np.meshgrid(*weights_ax, indexing="ij")
    gl_nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
    gl_weights = np.prod(np.stack([m.reshape(-1) for m in wmesh], axis=1), axis=1)
    g_vals = _g_envelope(kernel, box, gl_nodes)
    g_integral = float(np.dot(gl_weights, g_vals))
    g_sup = float(np.max(g_vals))
    # the ceiling easily overflows double precision, so compare in log space
    log_ceiling = math.lgamma(n + 1) + papangelou_bound * g_sup * math.exp(
        g_sup
    ) * g_integral
    log_emp = math.log(max(mean + 3.0 * se, 1e-300))
    return {
        "empirical": mean,
        "stderr": se,
        "log_bound": log_ceiling,
        "g_integral": g_integral,
        "g_sup": g_sup,
        "ok": log_emp <= log_ceiling,
    }
