# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: uniform-sum density and table-backed smoothed ReLU.

Signature-compatible with the pure-numpy fallback in ``cra._pure``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, pow

from ._tables import uniform_sum_coeffs


def lambda_k(t, int k):
    """Density of a sum of 2k uniforms on [-1/2, 1/2], evaluated at t."""
    t_arr = np.ascontiguousarray(np.asarray(t, dtype=np.float64).ravel())
    out = np.zeros_like(t_arr)
    cf_arr = np.ascontiguousarray(uniform_sum_coeffs(k))
    cdef double[::1] x = t_arr
    cdef double[::1] o = out
    cdef double[::1] cf = cf_arr
    cdef Py_ssize_t i, size = x.shape[0]
    cdef int j, n = 2 * k
    cdef double xv, acc
    for i in range(size):
        xv = x[i] + k
        if xv <= 0.0 or xv >= n:
            continue
        acc = 0.0
        for j in range(n):
            if xv <= j:
                break
            acc += cf[j] * pow(xv - j, n - 1)
        # Alternating-sum cancellation can leave ~1e-9-scale negatives near
        # the support edge for large k; the density is nonnegative.
        o[i] = acc if acc > 0.0 else 0.0
    return out.reshape(np.shape(t))


def srelu_spline_apply(t, coeffs, double x0, double h, double w0):
    """Smoothed-ReLU via cubic spline table on (-w0, w0), exact ReLU outside."""
    t_arr = np.ascontiguousarray(np.asarray(t, dtype=np.float64).ravel())
    out = np.empty_like(t_arr)
    coeffs_arr = np.ascontiguousarray(coeffs)
    cdef double[::1] x = t_arr
    cdef double[::1] o = out
    cdef double[:, ::1] c = coeffs_arr
    cdef Py_ssize_t i, size = x.shape[0]
    cdef Py_ssize_t idx, m = c.shape[1]
    cdef double tv, dt
    for i in range(size):
        tv = x[i]
        if tv <= -w0:
            o[i] = 0.0
        elif tv >= w0:
            o[i] = tv
        else:
            idx = <Py_ssize_t>floor((tv - x0) / h)
            if idx < 0:
                idx = 0
            elif idx > m - 1:
                idx = m - 1
            dt = tv - (x0 + idx * h)
            o[i] = ((c[0, idx] * dt + c[1, idx]) * dt + c[2, idx]) * dt + c[3, idx]
    return out.reshape(np.shape(t))
