"""Shared coefficient tables for the kernel backends."""

from functools import lru_cache
from math import comb, factorial

import numpy as np


@lru_cache(maxsize=None)
def uniform_sum_coeffs(k: int) -> np.ndarray:
    """Alternating-sum coefficients for the density of 2k uniforms on [-1/2, 1/2].

    Entry j is (-1)^j C(2k, j) / (2k-1)!; the density at x (shifted to [0, 2k])
    is sum_j coeffs[j] * max(x - j, 0)^(2k-1).
    """
    n = 2 * k
    cf = np.array([(-1.0) ** j * comb(n, j) for j in range(n)], dtype=np.float64)
    return cf / factorial(n - 1)
