"""Compensated summation and batch-means error estimation."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["neumaier_sum", "batch_means", "batch_means_complex", "iact_batch"]


def neumaier_sum(values) -> float:
    """Compensated (Neumaier) summation of a 1-d real array."""
    total = 0.0
    comp = 0.0
    for v in np.asarray(values, dtype=float):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def _batch_view(values: np.ndarray, n_batches: int) -> np.ndarray:
    n = values.shape[0]
    if n < 2 * n_batches:
        raise ValueError(
            f"need at least {2 * n_batches} values for {n_batches} batches, got {n}"
        )
    size = n // n_batches
    return values[: size * n_batches].reshape(n_batches, size)


def batch_means(values, n_batches: int = 32) -> tuple[float, float]:
    """Mean and batch-means standard error of a correlated real series.

    The series is cut into ``n_batches`` equal contiguous batches (discarding
    a remainder); the standard error is the standard deviation of the batch
    means divided by ``sqrt(n_batches)``.
    """
    values = np.asarray(values, dtype=float)
    batches = _batch_view(values, n_batches).mean(axis=1)
    mean = float(np.mean(batches))
    se = float(np.std(batches, ddof=1) / math.sqrt(n_batches))
    return mean, se


def batch_means_complex(values, n_batches: int = 32):
    """Complex mean plus separate standard errors for real and imaginary parts."""
    values = np.asarray(values, dtype=complex)
    m_re, se_re = batch_means(values.real, n_batches)
    m_im, se_im = batch_means(values.imag, n_batches)
    return complex(m_re, m_im), se_re, se_im


def iact_batch(values, n_batches: int = 32) -> float:
    """Integrated autocorrelation time estimated from batch means.

    ``iact = batch_size * var(batch means) / var(values)``; clipped below at 1.
    """
    values = np.asarray(values, dtype=float)
    v = float(np.var(values))
    if v == 0.0:
        return 1.0
    batches = _batch_view(values, n_batches)
    bvar = float(np.var(batches.mean(axis=1), ddof=1))
    return max(1.0, batches.shape[1] * bvar / v)
