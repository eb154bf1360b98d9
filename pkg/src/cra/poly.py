"""Low-degree polynomial targets: monomial enumeration, per-monomial subspace
bases, and the end-to-end random-feature learning pipeline."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .features import (LinearModel, SamplerConfig, TargetSpec, build_bank,
                       featurize, gd_fit, mse_on_measure)

_ENUM_LIMIT = 10 ** 6


@dataclass(frozen=True)
class Monomial:
    """Product of coordinate powers; exponents is a sorted tuple of
    (coordinate index, positive power) pairs."""

    exponents: tuple

    def __post_init__(self):
        exps = tuple(sorted((int(c), int(p)) for c, p in self.exponents))
        if any(p < 1 for _, p in exps):
            raise ValueError("powers must be positive")
        coords = [c for c, _ in exps]
        if len(set(coords)) != len(coords):
            raise ValueError("duplicate coordinate in monomial")
        object.__setattr__(self, "exponents", exps)

    @property
    def total_degree(self) -> int:
        return sum(p for _, p in self.exponents)

    def active_coords(self) -> list:
        return [c for c, _ in self.exponents]

    def eval(self, x: np.ndarray) -> np.ndarray:
        x_arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.ones(x_arr.shape[0])
        for c, p in self.exponents:
            out *= x_arr[:, c] ** p
        return out


def enum_monomials(d: int, q: int) -> list:
    """All monomials of total degree <= q in d variables, in deterministic
    (degree, lexicographic) order; there are C(q+d, q) of them."""
    if q > d:
        raise ValueError("require q <= d")
    if math.comb(q + d, q) > _ENUM_LIMIT:
        raise ValueError(f"C(q+d, q) exceeds the enumeration limit {_ENUM_LIMIT}")
    out = []
    for degree in range(q + 1):
        for combo in itertools.combinations_with_replacement(range(d), degree):
            exps = [(c, combo.count(c)) for c in sorted(set(combo))]
            out.append(Monomial(tuple(exps)))
    return out


def basis_for_monomial(mono: Monomial, d: int, q: int) -> np.ndarray:
    """Standard basis vectors of the active coordinates, padded with the
    lowest-index unused coordinates up to exactly q rows."""
    active = mono.active_coords()
    if len(active) > q or (active and max(active) >= d):
        raise ValueError("monomial does not fit dimensions (d, q)")
    chosen = list(active)
    for j in range(d):
        if len(chosen) == q:
            break
        if j not in chosen:
            chosen.append(j)
    basis = np.zeros((q, d))
    for row, c in enumerate(chosen):
        basis[row, c] = 1.0
    return basis


@dataclass
class PolySpec:
    terms: list  # [(Monomial, coefficient), ...]
    d: int
    q: int

    def __post_init__(self):
        monos = [m.exponents for m, _ in self.terms]
        if len(set(monos)) != len(monos):
            raise ValueError("duplicate monomials in polynomial")
        for mono, coeff in self.terms:
            if mono.total_degree > self.q:
                raise ValueError("monomial degree exceeds q")
            if not np.isfinite(coeff):
                raise ValueError("coefficients must be finite")


def poly_eval(spec: PolySpec, x: np.ndarray):
    """Exact monomial-sum evaluation; the ground truth for learning runs."""
    x_arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
    out = np.zeros(x_arr.shape[0])
    for mono, coeff in spec.terms:
        out += coeff * mono.eval(x_arr)
    return out if np.asarray(x).ndim > 1 else float(out[0])


def poly_target(spec: PolySpec) -> TargetSpec:
    return TargetSpec(
        kind="polynomial",
        eval_fn=lambda x: poly_eval(spec, np.atleast_2d(x)),
        fourier_note="degree-limited polynomial; sup-type Fourier data via "
                     "the per-monomial subspace decomposition",
    )


def load_poly_spec(path: str, d: int, q: int) -> PolySpec:
    """Read a polynomial from JSON: [{"exponents": [[coord, power], ...],
    "coeff": value}, ...]."""
    with open(path) as fh:
        raw = json.load(fh)
    terms = [
        (Monomial(tuple((c, p) for c, p in item["exponents"])),
         float(item["coeff"]))
        for item in raw
    ]
    return PolySpec(terms=terms, d=d, q=q)


def round_to_divisible(n: int, block: int) -> int:
    """Smallest multiple of block that is >= n."""
    return ((n + block - 1) // block) * block


def learn_poly(spec: PolySpec, a: int, N: int, R_c: float | None,
               zeta_samples: np.ndarray, seed, n_test: int = 4000,
               steps: int = 30_000):
    """Learn a low-degree polynomial with function-independent features.

    One subspace basis per monomial of degree <= q (bases depend only on
    (d, q), not on the coefficients), thresholds from the heavy-tailed
    measure, radius sqrt(q), outer coefficients by GD (ball-projected when
    R_c is given). Held-out MSE comes from fresh Unif[0,1]^d samples.
    """
    monos = enum_monomials(spec.d, spec.q)
    bases = [basis_for_monomial(m, spec.d, spec.q) for m in monos]
    cfg = SamplerConfig(q=spec.q, a=a, l=max(spec.q + 3, 3 * a + 3),
                        r=math.sqrt(spec.q), schedule="sup")
    rng = np.random.default_rng(seed)
    bank = build_bank(cfg, bases, N, rng)
    pts = np.atleast_2d(np.asarray(zeta_samples, dtype=np.float64))
    y = poly_eval(spec, pts)
    A = featurize(bank, pts)
    model = gd_fit(A, y, steps=steps, ball_radius=R_c)
    model.bank_ref = bank
    test_pts = rng.random((n_test, spec.d))
    test_mse = mse_on_measure(model, bank, poly_target(spec), test_pts)
    return model, bank, test_mse
