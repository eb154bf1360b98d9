"""ReLU-integral representations of cosines.

A windowed cosine h(t) = bump(t) * cos(alpha*t + psi) satisfies
h(t) = integral of h''(T) * ReLU(t - T) dT, and equals cos(alpha*t + psi) on
[-1, 1] where the bump plateaus at 1. Sampling T uniformly on [-2, 2] with
weight 4 * h''(T) therefore gives an unbiased one-unit estimator of the cosine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True)
class CosineWeight:
    alpha: float
    psi: float


def _sigma_derivs(u):
    """Smooth step sigma(u) = rho(u)/(rho(u)+rho(1-u)) with rho(u)=exp(-1/u),
    plus first and second derivatives. 0 for u<=0, 1 for u>=1.

    Derivatives on (0, 1), with A=rho(u), B=rho(1-u), S=A+B, g=1/u^2+1/(1-u)^2:
      sigma'  = A*B*g / S^2
      sigma'' = (A*B*(1/u^2 - 1/(1-u)^2)*g + A*B*g') / S^2
                - 2*A*B*g*(A/u^2 - B/(1-u)^2) / S^3
    """
    u = np.asarray(u, dtype=np.float64)
    s = np.zeros_like(u)
    s1 = np.zeros_like(u)
    s2 = np.zeros_like(u)
    s[u >= 1.0] = 1.0
    m = (u > 0.0) & (u < 1.0)
    um = u[m]
    with np.errstate(under="ignore"):
        a = np.exp(-1.0 / um)
        b = np.exp(-1.0 / (1.0 - um))
        tot = a + b
        inv2 = 1.0 / um ** 2
        inv2c = 1.0 / (1.0 - um) ** 2
        g = inv2 + inv2c
        s[m] = a / tot
        s1[m] = a * b * g / tot ** 2
        gp = -2.0 / um ** 3 + 2.0 / (1.0 - um) ** 3
        ab_p = a * b * (inv2 - inv2c)
        tot_p = a * inv2 - b * inv2c
        s2[m] = (ab_p * g + a * b * gp) / tot ** 2 - 2.0 * a * b * g * tot_p / tot ** 3
    return s, s1, s2


def bump_eval(t, deriv_order: int = 0):
    """Smooth bump: 1 on [-1, 1], 0 outside (-2, 2), C-infinity everywhere."""
    if deriv_order not in (0, 1, 2):
        raise ValueError("deriv_order must be 0, 1 or 2")
    t_arr = np.asarray(t, dtype=np.float64)
    u = 2.0 - np.abs(t_arr)
    s, s1, s2 = _sigma_derivs(u)
    if deriv_order == 0:
        out = s
    elif deriv_order == 1:
        out = -np.sign(t_arr) * s1
    else:
        out = s2
    return out if np.ndim(t) else float(out)


def h_second_deriv(w: CosineWeight, T):
    """Second derivative of bump(T) * cos(alpha*T + psi); zero for |T| >= 2."""
    T_arr = np.asarray(T, dtype=np.float64)
    alpha = np.asarray(w.alpha, dtype=np.float64)
    psi = np.asarray(w.psi, dtype=np.float64)
    g = bump_eval(T_arr, 0)
    g1 = bump_eval(T_arr, 1)
    g2 = bump_eval(T_arr, 2)
    phase = alpha * T_arr + psi
    out = g2 * np.cos(phase) - 2.0 * alpha * g1 * np.sin(phase) \
        - alpha ** 2 * g * np.cos(phase)
    return out if (np.ndim(T) or np.ndim(w.alpha) or np.ndim(w.psi)) else float(out)


def cosine_repr_check(w: CosineWeight, t: float, n_nodes: int = 32) -> float:
    """Quadrature of h''(T) * ReLU(t - T) over [-2, 2]; equals cos(alpha*t+psi)
    for t in [-1, 1] up to quadrature accuracy."""
    if abs(t) > 1.0:
        raise ValueError("t must lie in [-1, 1]")
    if n_nodes < 1:
        raise ValueError("n_nodes must be positive")
    nodes, weights = leggauss(n_nodes)
    # Panel width tracks the oscillation scale of cos(alpha*T).
    n_panels = max(16, int(np.ceil((2.0 + t) * max(1.0, abs(w.alpha)) / 2.0)))
    edges = np.linspace(-2.0, t, n_panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    T = mid[None, :] + half[None, :] * nodes[:, None]
    vals = h_second_deriv(w, T) * (t - T)
    return float(np.sum(half * (weights[:, None] * vals).sum(axis=0)))


def cosine_repr_mc(w: CosineWeight, t: float, n_samples: int, seed: int):
    """Monte-Carlo estimate of cos(alpha*t + psi) from T ~ Unif[-2, 2] draws.

    Returns (mean, standard error); stderr is +inf for a single sample.
    """
    if abs(t) > 1.0:
        raise ValueError("t must lie in [-1, 1]")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    T = rng.uniform(-2.0, 2.0, n_samples)
    vals = 4.0 * h_second_deriv(w, T) * np.maximum(0.0, t - T)
    mean = float(np.mean(vals))
    if n_samples == 1:
        return mean, float("inf")
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n_samples))
    return mean, stderr
