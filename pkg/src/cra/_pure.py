"""Pure-numpy implementations of the hot kernels.

Mirrors the compiled module ``cra._core``; one of the two is picked at
import time by ``cra._backend``.
"""

import numpy as np

from ._tables import uniform_sum_coeffs


def lambda_k(t, k):
    """Density of a sum of 2k uniforms on [-1/2, 1/2], evaluated at t."""
    t_arr = np.asarray(t, dtype=np.float64)
    n = 2 * k
    x = t_arr + k
    out = np.zeros_like(x)
    inside = (x > 0.0) & (x < n)
    xi = x[inside]
    cf = uniform_sum_coeffs(k)
    acc = np.zeros_like(xi)
    for j in range(n):
        base = xi - j
        np.maximum(base, 0.0, out=base)
        acc += cf[j] * base ** (n - 1)
    # Alternating-sum cancellation can leave ~1e-9-scale negatives near the
    # support edge for large k; the density is nonnegative by definition.
    np.maximum(acc, 0.0, out=acc)
    out[inside] = acc
    return out


def srelu_spline_apply(t, coeffs, x0, h, w0):
    """Smoothed-ReLU via cubic spline table on (-w0, w0), exact ReLU outside."""
    t_arr = np.asarray(t, dtype=np.float64)
    out = np.where(t_arr > 0.0, t_arr, 0.0)
    inner = (t_arr > -w0) & (t_arr < w0)
    ti = t_arr[inner]
    m = coeffs.shape[1]
    idx = np.floor((ti - x0) / h).astype(np.int64)
    np.clip(idx, 0, m - 1, out=idx)
    dt = ti - (x0 + idx * h)
    c0, c1, c2, c3 = coeffs[0, idx], coeffs[1, idx], coeffs[2, idx], coeffs[3, idx]
    out[inner] = ((c0 * dt + c1) * dt + c2) * dt + c3
    return out
