"""Function-independent random-feature sampling and convex outer-layer fitting.

Hidden-layer parameters are drawn once (uniform directions inside designated
subspaces, heavy-tailed thresholds) and only the outer linear coefficients are
trained, by constant step-size gradient descent on the squared loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kernels import ActivationKind, srelu_eval


class FitDivergenceError(RuntimeError):
    """Raised when the GD loss increases for many consecutive steps."""


def smoothness_schedule(q: int, b: int, schedule: str) -> int:
    """Per-group smoothness order: 'barron' uses k_b, 'sup' uses b*ceil((q+3)/2)."""
    if b < 0:
        raise ValueError("group index b must be >= 0")
    if schedule == "barron":
        if q % 4 != 3:
            return b * math.ceil((1 + q) / 4)
        return b * ((1 + q) // 4 + 1)
    if schedule == "sup":
        return b * math.ceil((q + 3) / 2)
    raise ValueError(f"unknown schedule {schedule!r}")


@dataclass(frozen=True)
class SamplerConfig:
    q: int
    a: int
    l: int
    r: float
    schedule: str = "sup"

    def __post_init__(self):
        if self.q < 1 or self.a < 0 or self.r <= 0:
            raise ValueError("need q >= 1, a >= 0, r > 0")
        if self.l < 2:
            raise ValueError("threshold tail exponent l must be >= 2")
        if self.schedule == "sup" and self.l < max(self.q + 3, 3 * self.a + 3):
            raise ValueError(
                f"sup schedule requires l >= max(q+3, 3a+3) = "
                f"{max(self.q + 3, 3 * self.a + 3)}"
            )
        smoothness_schedule(self.q, 0, self.schedule)  # validates schedule name

    def k_for(self, b: int) -> int:
        return smoothness_schedule(self.q, b, self.schedule)


@dataclass
class TargetSpec:
    """Analytically known target with documented Fourier-norm data."""

    kind: str
    eval_fn: Callable[[np.ndarray], np.ndarray]
    fourier_note: str = ""

    def eval(self, x: np.ndarray) -> np.ndarray:
        return self.eval_fn(np.asarray(x, dtype=np.float64))


def cosine_target(freq: Sequence[float], phase: float = 0.0) -> TargetSpec:
    freq_arr = np.asarray(freq, dtype=np.float64)
    return TargetSpec(
        kind="cosine",
        eval_fn=lambda x: np.cos(np.atleast_2d(x) @ freq_arr + phase).reshape(
            np.shape(x)[:-1]
        ),
        fourier_note=(
            f"atomic spectrum at +-freq, |freq|={np.linalg.norm(freq_arr):g}; "
            "all moment-weighted Fourier norms finite"
        ),
    )


def gaussian_target(width: float = 1.0) -> TargetSpec:
    return TargetSpec(
        kind="gaussian",
        eval_fn=lambda x: np.exp(
            -np.sum(np.atleast_2d(x) ** 2, axis=-1) / (2.0 * width ** 2)
        ).reshape(np.shape(x)[:-1]),
        fourier_note=(
            f"Gaussian spectrum with scale 1/width={1.0 / width:g}; "
            "every moment-weighted and sup-type Fourier norm finite"
        ),
    )


def sample_mu_l(l: int, count: int, rng) -> np.ndarray:
    """Draws from the density proportional to 1/(1 + t^(2l)).

    Rejection from a standard Cauchy proposal with acceptance probability
    (1 + t^2) / (2 * (1 + t^(2l))), which lies in (0, 1] for l >= 1.
    """
    if l < 2:
        raise ValueError("l must be >= 2")
    rng = np.random.default_rng(rng)
    out = np.empty(count)
    filled = 0
    while filled < count:
        batch = max(64, 2 * (count - filled))
        t = rng.standard_cauchy(batch)
        u = rng.random(batch)
        acc = t[u < (1.0 + t * t) / (2.0 * (1.0 + t ** (2 * l)))]
        take = min(count - filled, acc.size)
        out[filled:filled + take] = acc[:take]
        filled += take
    return out


def sample_sphere_subspace(basis: np.ndarray, count: int, rng) -> np.ndarray:
    """Uniform unit vectors in span(basis); basis rows must be orthonormal."""
    basis = np.atleast_2d(np.asarray(basis, dtype=np.float64))
    q = basis.shape[0]
    gram = basis @ basis.T
    if np.max(np.abs(gram - np.eye(q))) > 1e-10:
        raise ValueError("basis is not orthonormal")
    rng = np.random.default_rng(rng)
    g = rng.standard_normal((count, q))
    v = g @ basis
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v


@dataclass
class FeatureBank:
    """Sampled hidden-layer parameters, grouped by (subspace, smoothness)."""

    omegas: np.ndarray      # (N, d), unit rows
    thresholds: np.ndarray  # (N,)
    levels: np.ndarray      # (N,) smoothness order k per unit, 0 = ReLU
    groups: np.ndarray      # (N, 2) rows (subspace index i, smoothness index b)
    r: float
    acts: dict = field(default_factory=dict)  # k -> ActivationKind

    @property
    def size(self) -> int:
        return self.omegas.shape[0]

    def activation(self, k: int) -> ActivationKind:
        if k not in self.acts:
            self.acts[k] = ActivationKind.srelu(k, use_table=True)
        return self.acts[k]


def build_bank(cfg: SamplerConfig, bases: Sequence[np.ndarray], N: int, seed,
               use_table: bool = True) -> FeatureBank:
    """Draw the (i, b, j) feature grid: direction uniform on the sphere of
    span(B_i), threshold from mu_l, activation smoothness set by the schedule.
    """
    m = len(bases)
    block = m * (cfg.a + 1)
    if N % block != 0:
        raise ValueError(f"N={N} must be divisible by m*(a+1)={block}")
    per = N // block
    d = np.atleast_2d(bases[0]).shape[1]
    rng = np.random.default_rng(seed)
    omegas = np.zeros((N, d))
    thresholds = np.empty(N)
    levels = np.empty(N, dtype=np.int64)
    groups = np.empty((N, 2), dtype=np.int64)
    idx = 0
    for i in range(m):
        for b in range(cfg.a + 1):
            sl = slice(idx, idx + per)
            omegas[sl] = sample_sphere_subspace(bases[i], per, rng)
            thresholds[sl] = sample_mu_l(cfg.l, per, rng)
            levels[sl] = cfg.k_for(b)
            groups[sl] = (i, b)
            idx += per
    acts = {
        int(k): ActivationKind.srelu(int(k), use_table=use_table)
        for k in np.unique(levels)
    }
    return FeatureBank(omegas, thresholds, levels, groups, cfg.r, acts)


def featurize(bank: FeatureBank, x: np.ndarray) -> np.ndarray:
    """Feature matrix: column j is act_j(<omega_j, x>/r - T_j).

    Zero-norm directions contribute a zero inner product by convention.
    """
    x_arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
    args = x_arr @ bank.omegas.T / bank.r - bank.thresholds
    out = np.empty_like(args)
    for k in np.unique(bank.levels):
        cols = bank.levels == k
        out[:, cols] = srelu_eval(bank.activation(int(k)), args[:, cols])
    return out if np.asarray(x).ndim > 1 else out[0]


@dataclass
class LinearModel:
    coeffs: np.ndarray
    train_loss: float
    steps: int
    bank_ref: FeatureBank | None = None
    loss_history: np.ndarray | None = None

    def predict(self, features: np.ndarray) -> np.ndarray:
        return features @ self.coeffs


def _power_lambda_max(mat: np.ndarray) -> float:
    v = np.ones(mat.shape[0]) / np.sqrt(mat.shape[0])
    lam = 1.0
    for _ in range(30):
        w = mat @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return lam


def gd_fit(features: np.ndarray, targets: np.ndarray, steps: int,
           step_size="auto", ball_radius: float | None = None,
           v0: np.ndarray | None = None,
           record_history: bool = False) -> LinearModel:
    """Minimize (1/n) ||features @ v - targets||^2 by constant-step GD.

    Auto step size is 1/lambda_max of the Hessian (2/n) A^T A, estimated with
    30 power-iteration steps and a 1.01 safety factor. With ball_radius set,
    each step ends with Euclidean projection onto ||v|| <= ball_radius.

    For the overparameterized unconstrained zero-init case the iteration is
    run in the n-dimensional residual space (v_t = A^T u_t), which reproduces
    the primal iterates exactly while touching only an n x n matrix. When no
    projection, warm start, or history is requested, the T-th iterate of the
    linear recursion is evaluated in closed form through one symmetric
    eigendecomposition; this agrees with the explicit loop to roundoff.
    """
    A = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    n, N = A.shape
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(y)):
        raise ValueError("features and targets must be finite")

    dual = ball_radius is None and v0 is None and N > n
    if dual:
        M = (2.0 / n) * (A @ A.T)
        lam_max = _power_lambda_max(M)
    else:
        H = (2.0 / n) * (A.T @ A)
        b = (2.0 / n) * (A.T @ y)
        lam_max = _power_lambda_max(H)
    c0 = float(y @ y) / n

    if step_size == "auto":
        step = 1.0 / (1.01 * lam_max) if lam_max > 0 else 1.0
    else:
        step = float(step_size)

    history = np.empty(steps + 1) if record_history else None
    prev_loss = np.inf
    bad_streak = 0

    if dual:
        u = np.zeros(n)
        ty = (2.0 / n) * y
        if record_history:
            for t in range(steps):
                mu = M @ u
                loss = float(np.sum(((n / 2.0) * mu - y) ** 2)) / n
                history[t] = loss
                if loss > prev_loss:
                    bad_streak += 1
                    if bad_streak >= 10:
                        raise FitDivergenceError(
                            "loss increased 10 steps in a row")
                else:
                    bad_streak = 0
                prev_loss = loss
                u -= step * (mu - ty)
        else:
            # The T-th iterate of the recursion u <- u - step*(M u - ty) from
            # zero init has the closed form u_T = Q f(L) Q^T ty with
            # f(lam) = (1 - (1 - step*lam)^T)/lam (limit step*T at lam = 0),
            # so evaluate it spectrally instead of sweeping M per step.
            lam, Q = np.linalg.eigh(M)
            lam = np.maximum(lam, 0.0)
            if step * lam[-1] > 2.0:
                raise FitDivergenceError("step size exceeds stability bound")
            shrink = (1.0 - step * lam) ** steps
            safe = np.where(lam > 0.0, lam, 1.0)
            fac = np.where(lam > 0.0, (1.0 - shrink) / safe, step * steps)
            u = Q @ (fac * (Q.T @ ty))
        v = A.T @ u
    elif v0 is None and ball_radius is None and not record_history:
        # Same closed-form iterate as the dual branch, in coefficient space:
        # from zero init, v_T = Q f(L) Q^T b with f as above.
        lam, Q = np.linalg.eigh(H)
        lam = np.maximum(lam, 0.0)
        if step * lam[-1] > 2.0:
            raise FitDivergenceError("step size exceeds stability bound")
        shrink = (1.0 - step * lam) ** steps
        safe = np.where(lam > 0.0, lam, 1.0)
        fac = np.where(lam > 0.0, (1.0 - shrink) / safe, step * steps)
        v = Q @ (fac * (Q.T @ b))
    else:
        v = np.zeros(N) if v0 is None else np.asarray(v0, dtype=np.float64).copy()
        for t in range(steps):
            hv = H @ v
            loss = 0.5 * float(v @ hv) - float(b @ v) + c0
            if record_history:
                history[t] = loss
            if loss > prev_loss + 1e-15:
                bad_streak += 1
                if bad_streak >= 10:
                    raise FitDivergenceError("loss increased 10 steps in a row")
            else:
                bad_streak = 0
            prev_loss = loss
            v -= step * (hv - b)
            if ball_radius is not None:
                norm = float(np.linalg.norm(v))
                if norm > ball_radius:
                    v *= ball_radius / norm

    final_loss = float(np.mean((A @ v - y) ** 2))
    if record_history:
        history[steps] = final_loss
    return LinearModel(coeffs=v, train_loss=final_loss, steps=steps,
                       loss_history=history)


def corrective_fit(bank: FeatureBank, data, steps_per_group: int,
                   step_size="auto"):
    """Sequential residual fitting: highest smoothness group first, each later
    group fits what is left. Returns the stacked model and the squared-error
    trace after each group."""
    points, targets = data
    y = np.asarray(targets, dtype=np.float64)
    A = featurize(bank, np.atleast_2d(points))
    b_values = sorted(np.unique(bank.groups[:, 1]))[::-1]
    coeffs = np.zeros(bank.size)
    residual = y.copy()
    residual_norms = []
    total_steps = 0
    for b in b_values:
        cols = bank.groups[:, 1] == b
        sub = gd_fit(A[:, cols], residual, steps=steps_per_group,
                     step_size=step_size)
        coeffs[cols] = sub.coeffs
        residual = residual - A[:, cols] @ sub.coeffs
        residual_norms.append(float(np.mean(residual ** 2)))
        total_steps += sub.steps
    model = LinearModel(coeffs=coeffs, train_loss=float(np.mean(residual ** 2)),
                        steps=total_steps, bank_ref=bank)
    return model, residual_norms


def mse_on_measure(model: LinearModel, bank: FeatureBank, target: TargetSpec,
                   measure_samples: np.ndarray) -> float:
    """Monte-Carlo squared error of the model against the target, using the
    provided points as draws from the evaluation measure."""
    pts = np.atleast_2d(np.asarray(measure_samples, dtype=np.float64))
    if pts.shape[0] == 0:
        raise ValueError("measure_samples must be nonempty")
    pred = featurize(bank, pts) @ model.coeffs
    return float(np.mean((target.eval(pts) - pred) ** 2))
