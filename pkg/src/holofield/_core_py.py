"""Pure-numpy implementation of the hot sampling loop.

This module mirrors ``_core.pyx`` exactly: same update rule, same random
number consumption, same state layout.  The compiled extension is preferred
at import time when available; this fallback keeps the package fully
functional without a compiler.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def _insert_increment(base, row, weights, vkind, beta, svals, wvals):
    """Action increment ``beta * (U(base + row) - U(base))`` for one insertion."""
    if vkind == 0:  # linear profile
        return beta * float(np.dot(weights, row))
    if vkind == 1:  # overlap-suppression profile 1 - exp(-t)
        gain = np.exp(-base) * (-np.expm1(-row))
        return beta * float(np.dot(weights, gain))
    acc = 0.0  # charge mixture
    for s, w in zip(svals, wvals):
        gain = np.exp(-s * beta * base) * (-np.expm1(-s * beta * row))
        acc += w * float(np.dot(weights, gain))
    return acc


def run_block(
    pts,
    n,
    phi,
    action,
    nodes,
    weights,
    vkind,
    beta,
    svals,
    wvals,
    sigma_total,
    lo,
    hi,
    kind_u,
    pos_u,
    idx_u,
    acc_u,
):
    """Advance a block of birth-death steps for the flat Gaussian-kernel model.

    Arrays ``pts`` (capacity x d, first ``n`` rows live) and ``phi`` (cached
    field on the grid nodes) are updated in place.  One step consumes one
    entry of each of the four uniform streams regardless of the branch
    taken, so the random sequence is a pure function of the step index.

    Returns ``(n, action, birth_proposals, birth_accepts, death_proposals,
    death_accepts)``.
    """
    span = hi - lo
    births_p = births_a = deaths_p = deaths_a = 0
    steps = kind_u.shape[0]
    for t in range(steps):
        if kind_u[t] < 0.5:
            births_p += 1
            x = lo + pos_u[t] * span
            row = np.exp(-np.sum((nodes - x) ** 2, axis=1))
            delta = _insert_increment(phi, row, weights, vkind, beta, svals, wvals)
            if acc_u[t] * (n + 1) < math.exp(-delta) * sigma_total:
                pts[n] = x
                phi += row
                action += delta
                n += 1
                births_a += 1
        else:
            deaths_p += 1
            if n == 0:
                continue
            j = min(int(idx_u[t] * n), n - 1)
            x = pts[j]
            row = np.exp(-np.sum((nodes - x) ** 2, axis=1))
            base = phi - row
            delta = _insert_increment(base, row, weights, vkind, beta, svals, wvals)
            if acc_u[t] * sigma_total * math.exp(-delta) < n:
                pts[j] = pts[n - 1]
                phi -= row
                action -= delta
                n -= 1
                deaths_a += 1
    return n, action, births_p, births_a, deaths_p, deaths_a
