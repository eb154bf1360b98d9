"""Batch experiment driver with CSV output.

Subcommands: memorize, approx, poly, kernel-table. Runs are deterministic
given the flags; repeated runs produce byte-identical CSVs. CRA_THREADS caps
parallelism over independent (seed, sweep-point) tasks (0 or unset = auto).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .features import (SamplerConfig, build_bank, corrective_fit,
                       cosine_target, gaussian_target, mse_on_measure)
from .kernels import (ActivationKind, SmoothingFilter, filter_eval,
                      filter_fourier, srelu_eval)
from .memorize import gen_separated_set, memorize
from .poly import learn_poly, load_poly_spec, round_to_divisible


def slope_fit(rows) -> float:
    """Least-squares slope of log(mse) against log(N)."""
    rows = list(rows)
    ns = np.array([float(n) for n, _ in rows])
    mses = np.array([float(m) for _, m in rows])
    if len(set(ns)) < 3:
        raise ValueError("need at least 3 distinct N values")
    if np.any(mses <= 0):
        raise ValueError("mse values must be positive")
    return float(np.polyfit(np.log(ns), np.log(mses), 1)[0])


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path, header, rows, config_line):
    lines = [f"# cra {__version__} | {config_line}", ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_seeds(text: str):
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def _parse_int_list(text: str):
    return [int(s) for s in text.split(",")]


def _n_workers(n_tasks: int) -> int:
    raw = os.environ.get("CRA_THREADS", "0")
    cap = int(raw) if raw else 0
    if cap <= 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _run_tasks(tasks):
    workers = _n_workers(len(tasks))
    if workers == 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda f: f(), tasks))


def _ball_samples(rng, count, dim, radius):
    x = rng.standard_normal((count, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return radius * x * rng.random((count, 1)) ** (1.0 / dim)


def _cmd_kernel_table(args):
    filt = SmoothingFilter(k=args.k, w0=args.w0, alpha0=args.alpha0)
    act = ActivationKind.srelu(args.k, w0=args.w0, alpha0=args.alpha0)
    t = np.linspace(args.t_min, args.t_max, args.grid)
    rows = list(zip(
        t,
        np.maximum(0.0, t),
        srelu_eval(act, t),
        filter_eval(filt, t),
        filter_fourier(filt, t),
    ))
    cfg = (f"kernel-table k={args.k} w0={_fmt(args.w0)} "
           f"alpha0={_fmt(args.alpha0)} grid={args.grid} "
           f"t_min={_fmt(args.t_min)} t_max={_fmt(args.t_max)}")
    _write_csv(args.out, ["t", "relu", "srelu_k", "filter", "filter_fourier"],
               rows, cfg)
    return 0


def _cmd_memorize(args):
    seeds = _parse_seeds(args.seeds)
    rows = []
    for seed in seeds:
        lset = gen_separated_set(args.n, args.d, args.theta, seed)
        net, history = memorize(
            lset, eps=args.eps, delta=args.delta, c0_const=args.c0,
            seed=seed, n0=args.n0, refit=True, refit_steps=args.refit_steps,
        )
        n0 = args.n0 if args.n0 else 32 * args.n
        for i, res in enumerate(history):
            rows.append((seed, str(i), i * n0, res))
        refit_err = float(np.sum((net(lset.points) - lset.labels) ** 2))
        rows.append((seed, "refit", net.size, refit_err))
    cfg = (f"memorize n={args.n} d={args.d} theta={_fmt(args.theta)} "
           f"eps={_fmt(args.eps)} delta={_fmt(args.delta)} c0={_fmt(args.c0)} "
           f"n0={args.n0} refit_steps={args.refit_steps} seeds={args.seeds}")
    _write_csv(args.out, ["seed", "round", "units_cumulative",
                          "residual_sq_norm"], rows, cfg)
    return 0


def _make_target(name, q):
    if name == "gaussian":
        return gaussian_target()
    if name == "cosine":
        return cosine_target(np.full(q, 2.0 / math.sqrt(q)))
    raise ValueError(f"unknown target {name!r}")


def _cmd_approx(args):
    target = _make_target(args.target, args.q)
    sweep = _parse_int_list(args.N)
    seeds = _parse_seeds(args.seeds)
    l_val = args.l if args.l else max(args.q + 3, 3 * args.a + 3)
    cfg = SamplerConfig(q=args.q, a=args.a, l=l_val, r=args.r,
                        schedule=args.schedule)
    basis = np.eye(args.q)

    def make_task(seed, n_units):
        def task():
            rng = np.random.default_rng(seed)
            bank = build_bank(cfg, [basis], n_units, rng)
            train = _ball_samples(rng, args.train_samples, args.q, args.r)
            test = _ball_samples(rng, args.test_samples, args.q, args.r)
            model, group_resid = corrective_fit(
                bank, (train, target.eval(train)), steps_per_group=args.steps)
            test_mse = mse_on_measure(model, bank, target, test)
            resid_str = ";".join(_fmt(v) for v in group_resid)
            return (n_units, args.a, args.schedule, seed,
                    model.train_loss, test_mse, resid_str)
        return task

    tasks = [make_task(seed, n_units) for n_units in sweep for seed in seeds]
    rows = sorted(_run_tasks(tasks), key=lambda r: (r[0], r[3]))
    cfg_line = (f"approx target={args.target} q={args.q} a={args.a} "
                f"schedule={args.schedule} l={l_val} r={_fmt(args.r)} "
                f"N={args.N} seeds={args.seeds} steps={args.steps} "
                f"train={args.train_samples} test={args.test_samples}")
    _write_csv(args.out, ["N", "a", "schedule", "seed", "train_mse",
                          "test_mse", "group_residuals"], rows, cfg_line)
    return 0


def _cmd_poly(args):
    spec = load_poly_spec(args.coeffs, args.d, args.q)
    m = math.comb(args.q + args.d, args.q)
    n_units = round_to_divisible(args.N, m * (args.a + 1))
    seeds = _parse_seeds(args.seeds)

    def make_task(seed):
        def task():
            rng = np.random.default_rng(seed)
            train = rng.random((args.train_samples, args.d))
            model, bank, test_mse = learn_poly(
                spec, a=args.a, N=n_units, R_c=args.rc, zeta_samples=train,
                seed=rng, n_test=args.test_samples, steps=args.steps)
            return (n_units, args.a, seed, model.train_loss, test_mse)
        return task

    rows = sorted(_run_tasks([make_task(s) for s in seeds]),
                  key=lambda r: r[2])
    cfg_line = (f"poly coeffs={args.coeffs} d={args.d} q={args.q} a={args.a} "
                f"N={n_units} rc={args.rc} seeds={args.seeds} "
                f"steps={args.steps} train={args.train_samples} "
                f"test={args.test_samples}")
    _write_csv(args.out, ["N", "a", "seed", "train_mse", "test_mse"],
               rows, cfg_line)
    return 0


def _add_common(p):
    p.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p.add_argument("--config", help="file with key=value lines mirroring flags")


def build_parser():
    parser = argparse.ArgumentParser(prog="cra")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel-table", help="tabulate kernels to CSV")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--w0", type=float, default=0.5)
    p.add_argument("--alpha0", type=float, default=math.pi / 16)
    p.add_argument("--t-min", type=float, default=-2.0)
    p.add_argument("--t-max", type=float, default=2.0)
    _add_common(p)
    p.set_defaults(func=_cmd_kernel_table)

    p = sub.add_parser("memorize", help="corrective memorization runs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--c0", type=float, default=4.0)
    p.add_argument("--n0", type=int, default=0)
    p.add_argument("--refit-steps", type=int, default=200_000)
    p.add_argument("--seed", dest="seeds", default=argparse.SUPPRESS)
    p.add_argument("--seeds", dest="seeds", default="0")
    _add_common(p)
    p.set_defaults(func=_cmd_memorize)

    p = sub.add_parser("approx", help="approximation-rate sweeps")
    p.add_argument("--target", choices=["gaussian", "cosine"],
                   default="gaussian")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--N", required=True, help="comma list of unit counts")
    p.add_argument("--schedule", choices=["sup", "barron"], default="sup")
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--train-samples", type=int, default=2000)
    p.add_argument("--test-samples", type=int, default=4000)
    p.add_argument("--steps", type=int, default=8000)
    p.add_argument("--seeds", default="0")
    _add_common(p)
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("poly", help="low-degree polynomial learning")
    p.add_argument("--coeffs", required=True, help="polynomial JSON path")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--rc", type=float, default=None)
    p.add_argument("--train-samples", type=int, default=4000)
    p.add_argument("--test-samples", type=int, default=4000)
    p.add_argument("--steps", type=int, default=30_000)
    p.add_argument("--seeds", default="0")
    _add_common(p)
    p.set_defaults(func=_cmd_poly)
    return parser


def _inject_config(argv):
    """Expand --config <path> into flag tokens; explicit flags override."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    tokens = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, "
                                 f"got {line!r}")
            key, value = line.split("=", 1)
            tokens += [f"--{key.strip()}", value.strip()]
    # Config tokens go first so explicit command-line flags win.
    return tokens + argv[:idx] + argv[idx + 2:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv and not argv[0].startswith("-"):
            argv = argv[:1] + _inject_config(argv[1:])
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
