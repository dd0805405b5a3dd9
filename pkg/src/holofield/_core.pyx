# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot sampling loop.

Semantically identical to ``_core_py.run_block``; see that module for the
contract.  Floating-point results may differ from the fallback at rounding
level because summation orders differ.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, expm1

BACKEND_NAME = "compiled"


cdef inline double _insert_increment(
    const double[::1] base,
    const double[::1] row,
    const double[::1] weights,
    int vkind,
    double beta,
    const double[::1] svals,
    const double[::1] wvals,
    Py_ssize_t ng,
) noexcept nogil:
    cdef double acc = 0.0
    cdef double sub
    cdef Py_ssize_t g, i
    if vkind == 0:
        for g in range(ng):
            acc += weights[g] * row[g]
        return beta * acc
    if vkind == 1:
        for g in range(ng):
            acc += weights[g] * exp(-base[g]) * (-expm1(-row[g]))
        return beta * acc
    for i in range(svals.shape[0]):
        sub = 0.0
        for g in range(ng):
            sub += weights[g] * exp(-svals[i] * beta * base[g]) * (
                -expm1(-svals[i] * beta * row[g])
            )
        acc += wvals[i] * sub
    return acc


def run_block(
    double[:, ::1] pts,
    Py_ssize_t n,
    double[::1] phi,
    double action,
    const double[:, ::1] nodes,
    const double[::1] weights,
    int vkind,
    double beta,
    const double[::1] svals,
    const double[::1] wvals,
    double sigma_total,
    const double[::1] lo,
    const double[::1] hi,
    const double[::1] kind_u,
    const double[:, ::1] pos_u,
    const double[::1] idx_u,
    const double[::1] acc_u,
):
    cdef Py_ssize_t steps = kind_u.shape[0]
    cdef Py_ssize_t ng = nodes.shape[0]
    cdef Py_ssize_t d = nodes.shape[1]
    cdef Py_ssize_t t, g, k, j
    cdef double delta, d2, diff
    cdef long births_p = 0, births_a = 0, deaths_p = 0, deaths_a = 0
    cdef cnp.ndarray row_arr = np.empty(ng, dtype=np.float64)
    cdef cnp.ndarray base_arr = np.empty(ng, dtype=np.float64)
    cdef cnp.ndarray x_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] row = row_arr
    cdef double[::1] base = base_arr
    cdef double[::1] x = x_arr

    with nogil:
        for t in range(steps):
            if kind_u[t] < 0.5:
                births_p += 1
                for k in range(d):
                    x[k] = lo[k] + pos_u[t, k] * (hi[k] - lo[k])
                for g in range(ng):
                    d2 = 0.0
                    for k in range(d):
                        diff = nodes[g, k] - x[k]
                        d2 += diff * diff
                    row[g] = exp(-d2)
                delta = _insert_increment(
                    phi, row, weights, vkind, beta, svals, wvals, ng
                )
                if acc_u[t] * (n + 1) < exp(-delta) * sigma_total:
                    for k in range(d):
                        pts[n, k] = x[k]
                    for g in range(ng):
                        phi[g] += row[g]
                    action += delta
                    n += 1
                    births_a += 1
            else:
                deaths_p += 1
                if n == 0:
                    continue
                j = <Py_ssize_t>(idx_u[t] * n)
                if j > n - 1:
                    j = n - 1
                for k in range(d):
                    x[k] = pts[j, k]
                for g in range(ng):
                    d2 = 0.0
                    for k in range(d):
                        diff = nodes[g, k] - x[k]
                        d2 += diff * diff
                    row[g] = exp(-d2)
                    base[g] = phi[g] - row[g]
                delta = _insert_increment(
                    base, row, weights, vkind, beta, svals, wvals, ng
                )
                if acc_u[t] * sigma_total * exp(-delta) < n:
                    for k in range(d):
                        pts[j, k] = pts[n - 1, k]
                    for g in range(ng):
                        phi[g] -= row[g]
                    action -= delta
                    n -= 1
                    deaths_a += 1

    return n, action, births_p, births_a, deaths_p, deaths_a
