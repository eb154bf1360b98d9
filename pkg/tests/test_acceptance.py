"""End-to-end acceptance suite.

Each criterion prints one PASS/FAIL summary line (visible with pytest -s or in
captured output) and asserts the same condition. Expensive runs are shared
through module-scoped fixtures.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from cra.cli import _ball_samples, main, slope_fit
from cra.features import (SamplerConfig, build_bank, corrective_fit,
                          gaussian_target, gd_fit, mse_on_measure)
from cra.kernels import (ActivationKind, SmoothingFilter, filter_eval,
                         filter_fourier, srelu_eval)
from cra.memorize import gen_separated_set, memorize
from cra.poly import Monomial, PolySpec, learn_poly
from cra.reps import CosineWeight, cosine_repr_check, cosine_repr_mc


def _report(name, ok, detail):
    print(f"[{name}] {'PASS' if ok else 'FAIL'}: {detail}")


# --------------------------------------------------------------------------
# A1: kernel identities
# --------------------------------------------------------------------------

def test_a1_kernel_identities():
    t0 = time.monotonic()
    worst_id = 0.0
    worst_int = 0.0
    fourier_ok = True
    for k in (1, 2, 3):
        act = ActivationKind.srelu(k)
        grid = np.linspace(-5, 5, 10_000)
        grid = grid[np.abs(grid) >= act.w0]
        worst_id = max(worst_id, float(np.max(
            np.abs(srelu_eval(act, grid) - np.maximum(0.0, grid)))))
        filt = SmoothingFilter(k=k)
        total, _ = quad(lambda x: filter_eval(filt, x), -filt.w0, filt.w0,
                        limit=200)
        worst_int = max(worst_int, abs(total - 1.0))
        xi = np.linspace(-1e3, 1e3, 40_001)
        vals = filter_fourier(filt, xi)
        fourier_ok = fourier_ok and bool(np.all((vals > 0.0)
                                                & (vals <= 1.0 + 1e-12)))
    elapsed = time.monotonic() - t0
    ok = worst_id <= 1e-8 and worst_int <= 1e-10 and fourier_ok \
        and elapsed < 10.0
    _report("A1", ok, f"identity err {worst_id:.2e}, integral err "
            f"{worst_int:.2e}, fourier in (0,1]: {fourier_ok}, "
            f"{elapsed:.1f}s")
    assert worst_id <= 1e-8
    assert worst_int <= 1e-10
    assert fourier_ok
    assert elapsed < 10.0


# --------------------------------------------------------------------------
# A2: cosine representation
# --------------------------------------------------------------------------

def test_a2_cosine_representation():
    t0 = time.monotonic()
    worst = 0.0
    for alpha in (0.0, 1.0, 5.0, 20.0):
        for psi in (0.0, math.pi / 3, math.pi / 2):
            w = CosineWeight(alpha, psi)
            for t in np.linspace(-1, 1, 21):
                got = cosine_repr_check(w, float(t))
                worst = max(worst, abs(got - math.cos(alpha * t + psi)))
    mc_ok = True
    for alpha, psi in ((1.0, 0.0), (5.0, math.pi / 3)):
        mean, stderr = cosine_repr_mc(CosineWeight(alpha, psi), 0.5,
                                      200_000, seed=11)
        mc_ok = mc_ok and abs(mean - math.cos(alpha * 0.5 + psi)) \
            <= 5 * stderr + 1e-3
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-5 and mc_ok and elapsed < 30.0
    _report("A2", ok, f"quadrature err {worst:.2e}, MC within band: {mc_ok}, "
            f"{elapsed:.1f}s")
    assert worst <= 1e-5
    assert mc_ok
    assert elapsed < 30.0


# --------------------------------------------------------------------------
# A3: memorization (n=64, d=8, theta=0.9 >= 0.5)
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def a3_runs():
    t0 = time.monotonic()
    runs = []
    for seed in range(10):
        lset = gen_separated_set(64, 8, 0.9, seed)
        net, history = memorize(lset, eps=1e-2, delta=0.25, c0_const=4.0,
                                seed=seed, refit=False)
        feats = net.features(lset.points)
        model = gd_fit(feats, lset.labels, steps=8_000_000)
        refit_err = float(np.sum((feats @ model.coeffs - lset.labels) ** 2))
        ratios = [history[i + 1] / history[i]
                  for i in range(len(history) - 1)]
        runs.append({"history": history, "ratios": ratios,
                     "refit_err": refit_err, "units": net.size})
    return runs, time.monotonic() - t0


def test_a3i_per_round_contraction(a3_runs):
    runs, elapsed = a3_runs
    all_ratios = [r for run in runs for r in run["ratios"]]
    med = float(np.median(all_ratios))
    ok = med < 0.9 and elapsed < 300.0
    _report("A3(i)", ok, f"median per-round ratio {med:.3e} "
            f"(target < 0.9) at N0 = 32n = 2048 units/round, "
            f"{elapsed:.1f}s shared")
    assert elapsed < 300.0
    assert med < 0.9


def test_a3ii_final_error(a3_runs):
    runs, _ = a3_runs
    errs = [run["refit_err"] for run in runs]
    n_pass = sum(e <= 1e-2 for e in errs)
    ok = n_pass >= 8
    _report("A3(ii)", ok, f"{n_pass}/10 seeds with sum-squared error <= 1e-2 "
            f"(max {max(errs):.2e}); achieved N = {runs[0]['units']} units")
    assert n_pass >= 8


def test_a3iii_refit_no_worse_than_stacked(a3_runs):
    runs, _ = a3_runs
    ok = all(run["refit_err"] <= run["history"][-1] + 1e-8 for run in runs)
    _report("A3(iii)", ok, "joint GD refit <= stacked construction loss "
            "+ 1e-8 on all 10 seeds")
    assert ok


# --------------------------------------------------------------------------
# A4: approximation rate for the Gaussian target, q = 2
# --------------------------------------------------------------------------

def _a4_single(a, n_units, seed, steps=8000):
    target = gaussian_target()
    cfg = SamplerConfig(q=2, a=a, l=max(5, 3 * a + 3), r=1.0)
    rng = np.random.default_rng(seed)
    bank = build_bank(cfg, [np.eye(2)], n_units, rng)
    train = _ball_samples(rng, 2000, 2, 1.0)
    test = _ball_samples(rng, 4000, 2, 1.0)
    model, group_resid = corrective_fit(bank, (train, target.eval(train)),
                                        steps_per_group=steps)
    return mse_on_measure(model, bank, target, test), group_resid


@pytest.fixture(scope="module")
def a4_runs():
    t0 = time.monotonic()
    sweep = {}
    for n_units in (64, 128, 256, 512, 1024):
        mses = [_a4_single(0, n_units, seed)[0] for seed in range(10)]
        sweep[n_units] = float(np.median(mses))
    depth1 = [_a4_single(1, 512, seed) for seed in range(10)]
    return sweep, depth1, time.monotonic() - t0


def test_a4_rate_and_corrective_gain(a4_runs):
    sweep, depth1, elapsed = a4_runs
    slope = slope_fit(sweep.items())
    med1 = float(np.median([m for m, _ in depth1]))
    resid_down = all(r[1] <= r[0] for _, r in depth1)
    ok = (-1.6 <= slope <= -0.5 and med1 <= sweep[512] and resid_down
          and elapsed < 600.0)
    _report("A4", ok, f"a=0 slope {slope:.3f} in [-1.6,-0.5]; a=1 median "
            f"{med1:.2e} <= a=0 median {sweep[512]:.2e} at N=512; group "
            f"residuals decrease: {resid_down}; {elapsed:.1f}s")
    assert -1.6 <= slope <= -0.5
    assert med1 <= sweep[512]
    assert resid_down
    assert elapsed < 600.0


# --------------------------------------------------------------------------
# A5: polynomial learning, f = 3 x1 x2 - 2 x3^2 + 0.5 on [0,1]^6
# --------------------------------------------------------------------------

A5_SPEC = PolySpec(terms=[(Monomial(((0, 1), (1, 1))), 3.0),
                          (Monomial(((2, 2),)), -2.0),
                          (Monomial(()), 0.5)], d=6, q=2)


@pytest.fixture(scope="module")
def a5_runs():
    t0 = time.monotonic()
    block = math.comb(8, 2) * 2       # m * (a+1) = 28 * 2
    medians = {}
    for base_n in (2000, 4000):
        n_units = ((base_n + block - 1) // block) * block
        mses = []
        for seed in range(5):
            rng = np.random.default_rng(seed)
            train = rng.random((4000, 6))
            _, _, mse = learn_poly(A5_SPEC, a=1, N=n_units, R_c=None,
                                   zeta_samples=train, seed=rng,
                                   n_test=4000, steps=30_000)
            mses.append(mse)
        medians[n_units] = float(np.median(mses))
    return medians, time.monotonic() - t0


def test_a5_polynomial_learning(a5_runs):
    medians, elapsed = a5_runs
    base = medians[2016]
    doubled = medians[4032]
    ok = base <= 1e-2 and doubled <= base and elapsed < 600.0
    _report("A5", ok, f"median test MSE {base:.2e} at N=2016 (<= 1e-2); "
            f"doubled-N median {doubled:.2e} (no increase); {elapsed:.1f}s")
    assert base <= 1e-2
    assert doubled <= base
    assert elapsed < 600.0


# --------------------------------------------------------------------------
# A6: optimizer against the normal-equations oracle
# --------------------------------------------------------------------------

def test_a6_optimizer_oracle():
    t0 = time.monotonic()
    rng = np.random.default_rng(7)
    A = rng.standard_normal((100, 50))
    y = rng.standard_normal(100)
    model = gd_fit(A, y, steps=10_000, record_history=True)
    v_star = np.linalg.solve(A.T @ A, A.T @ y)
    opt = float(np.mean((A @ v_star - y) ** 2))
    rel = (model.train_loss - opt) / opt
    monotone = bool(np.all(np.diff(model.loss_history) <= 1e-12))
    elapsed = time.monotonic() - t0
    ok = rel <= 1e-6 and monotone and elapsed < 5.0
    _report("A6", ok, f"relative excess loss {rel:.2e} (<= 1e-6), "
            f"monotone: {monotone}, {elapsed:.1f}s")
    assert rel <= 1e-6
    assert monotone
    assert elapsed < 5.0


# --------------------------------------------------------------------------
# A7: byte-identical CSV reproducibility
# --------------------------------------------------------------------------

def test_a7_reproducibility(tmp_path):
    args_sets = [
        ["kernel-table", "--k", "2", "--grid", "101"],
        ["memorize", "--n", "4", "--d", "3", "--theta", "0.5", "--n0", "64",
         "--refit-steps", "500", "--seeds", "0,1"],
        ["approx", "--N", "16,32", "--seeds", "0", "--train-samples", "100",
         "--test-samples", "100", "--steps", "100"],
    ]
    ok = True
    for i, args in enumerate(args_sets):
        out1 = tmp_path / f"run{i}a.csv"
        out2 = tmp_path / f"run{i}b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        ok = ok and out1.read_bytes() == out2.read_bytes()
    _report("A7", ok, "repeated CLI runs byte-identical for "
            f"{len(args_sets)} commands")
    assert ok
