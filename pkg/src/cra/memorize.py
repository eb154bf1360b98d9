"""Corrective memorization: interpolate arbitrary labels on well-separated
points with a two-layer ReLU network built from random features.

Each round estimates the current residual through its discrete Fourier
transform at Gaussian frequencies, rewrites the resulting cosines as ReLU
integrals, and subtracts the empirical estimate; rounds multiply the error
down and the stacked units form one network. A final joint refit of the outer
coefficients (a convex problem) is optional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import gd_fit
from .reps import CosineWeight, h_second_deriv

_MASK = 0xFFFFFFFFFFFFFFFF


def substream_seed(seed: int, index: int) -> int:
    """Splitmix-style mixer deriving independent per-round streams."""
    z = (int(seed) ^ int(index)) & _MASK
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class PackingError(RuntimeError):
    """Separation theta is not achievable within the rejection budget."""


@dataclass
class LabeledSet:
    points: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) in [0, 1]
    theta: float
    d: int

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=np.float64)
        n = self.points.shape[0]
        if self.labels.shape != (n,):
            raise ValueError("labels must match points")
        if np.any(np.linalg.norm(self.points, axis=1) > 1.0 + 1e-12):
            raise ValueError("points must lie in the unit ball")
        if np.any((self.labels < 0) | (self.labels > 1)):
            raise ValueError("labels must lie in [0, 1]")
        if n > 1:
            diff = self.points[:, None, :] - self.points[None, :, :]
            dist = np.linalg.norm(diff, axis=-1)
            np.fill_diagonal(dist, np.inf)
            if dist.min() < self.theta - 1e-12:
                raise ValueError("pairwise separation below certified theta")

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class MemorizePlan:
    s: float
    sigma: float
    n0: int
    rounds: int
    seed: int

    def __post_init__(self):
        if self.n0 < 1 or self.rounds < 1:
            raise ValueError("n0 and rounds must be >= 1")

    @classmethod
    def build(cls, n: int, theta: float, c0_const: float, eps: float,
              delta: float, n0: int, seed: int) -> "MemorizePlan":
        s = c0_const + c0_const * math.log(max(1.0 / theta, 2.0))
        # log n floored at log 2 so the n = 1 edge case keeps sigma, alpha > 0.
        sigma = math.sqrt(2.0 * s * math.log(max(n, 2))) / theta
        rounds = math.ceil(math.log(n) + math.log(1.0 / delta)
                           + math.log(1.0 / eps))
        return cls(s=s, sigma=sigma, n0=n0, rounds=max(rounds, 1), seed=seed)


@dataclass
class ReluNetwork:
    """Two-layer ReLU network: x -> sum_j a_j max(0, scale*<omega_j, x> - T_j)."""

    coeffs: np.ndarray      # (N,)
    omegas: np.ndarray      # (N, d)
    thresholds: np.ndarray  # (N,)
    scale: float

    def features(self, x: np.ndarray) -> np.ndarray:
        x_arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.maximum(0.0, self.scale * (x_arr @ self.omegas.T)
                          - self.thresholds)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = self.features(x) @ self.coeffs
        return out if np.asarray(x).ndim > 1 else float(out[0])

    @property
    def size(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def concat(cls, nets) -> "ReluNetwork":
        return cls(
            coeffs=np.concatenate([m.coeffs for m in nets]),
            omegas=np.concatenate([m.omegas for m in nets]),
            thresholds=np.concatenate([m.thresholds for m in nets]),
            scale=nets[0].scale,
        )


def gen_separated_set(n: int, d: int, theta: float, seed,
                      max_draws: int = 10 ** 6) -> LabeledSet:
    """Rejection-sample n uniform unit-ball points with pairwise separation
    >= theta; labels are Unif[0, 1]."""
    rng = np.random.default_rng(seed)
    points = np.empty((n, d))
    count = 0
    for _ in range(max_draws):
        x = rng.standard_normal(d)
        x *= rng.random() ** (1.0 / d) / np.linalg.norm(x)
        if count == 0 or np.min(
            np.linalg.norm(points[:count] - x, axis=1)
        ) >= theta:
            points[count] = x
            count += 1
            if count == n:
                break
    if count < n:
        raise PackingError(
            f"placed only {count}/{n} points at separation {theta} "
            f"within {max_draws} draws"
        )
    labels = rng.random(n)
    return LabeledSet(points=points, labels=labels, theta=theta, d=d)


def dft_eval(lset: LabeledSet, residual: np.ndarray, xi: np.ndarray):
    """Discrete Fourier estimator sum_j residual_j exp(i <xi, x_j>).

    Its modulus never exceeds the l1 norm of the residual.
    """
    residual = np.asarray(residual, dtype=np.float64)
    if residual.shape != (lset.n,):
        raise ValueError("residual must have one entry per point")
    xi_arr = np.asarray(xi, dtype=np.float64)
    phases = lset.points @ np.atleast_2d(xi_arr).T  # (n, m)
    out = residual @ np.exp(1j * phases)
    return out if xi_arr.ndim > 1 else complex(out[0])


def correction_round(lset: LabeledSet, residual: np.ndarray,
                     plan: MemorizePlan, round_index: int):
    """One corrective round: draw (xi, T) pairs, estimate the residual via its
    DFT magnitude/phase with the ReLU-cosine weight, subtract the average.

    Returns the round's partial network and the new residual.
    """
    residual = np.asarray(residual, dtype=np.float64)
    if not np.all(np.isfinite(residual)):
        raise ValueError("residual must be finite")
    n = lset.n
    rng = np.random.default_rng(substream_seed(plan.seed, round_index))
    xi = rng.standard_normal((plan.n0, lset.d)) * plan.sigma
    T = rng.uniform(-2.0, 2.0, plan.n0)

    alpha = 2.0 * plan.s * math.log(max(n, 2)) / lset.theta
    scale = 1.0 / alpha

    inner = lset.points @ xi.T                      # (n, n0)
    F = residual @ np.exp(1j * inner)               # (n0,)
    amp = np.abs(F)
    phi = np.where(amp > 0.0, -np.angle(F), 0.0)
    weights = amp * 4.0 * h_second_deriv(CosineWeight(alpha, phi), T)

    feats = np.maximum(0.0, scale * inner - T)      # (n, n0)
    fhat = feats @ (weights / plan.n0)
    partial = ReluNetwork(coeffs=weights / plan.n0, omegas=xi,
                          thresholds=T, scale=scale)
    return partial, residual - fhat


def memorize(lset: LabeledSet, eps: float, delta: float,
             c0_const: float = 4.0, seed: int = 0, n0: int | None = None,
             refit: bool = True, refit_steps: int = 200_000):
    """Run the full corrective pipeline and return (network, history).

    history[i] is the squared residual norm after i rounds (history[0] is the
    label norm). With refit=True the stacked outer coefficients are replaced
    by a joint constant-step GD fit over the same units.
    """
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    n = lset.n
    if n0 is None:
        n0 = 32 * n
    plan = MemorizePlan.build(n, lset.theta, c0_const, eps, delta, n0, seed)
    residual = lset.labels.copy()
    history = [float(residual @ residual)]
    partials = []
    for i in range(plan.rounds):
        partial, residual = correction_round(lset, residual, plan, i)
        partials.append(partial)
        history.append(float(residual @ residual))
    net = ReluNetwork.concat(partials)
    if refit:
        feats = net.features(lset.points)
        model = gd_fit(feats, lset.labels, steps=refit_steps)
        net = ReluNetwork(coeffs=model.coeffs, omegas=net.omegas,
                          thresholds=net.thresholds, scale=net.scale)
    return net, history
