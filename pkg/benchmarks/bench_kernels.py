"""Micro-benchmark of the compiled kernel core against the pure-numpy
fallback. Run as: python benchmarks/bench_kernels.py [n_points]
"""

import sys
import time

import numpy as np

from cra import _pure
from cra.kernels import ActivationKind

try:
    from cra import _core
except ImportError:
    _core = None


def best_of(fn, repeat=7):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1_000_000
    rng = np.random.default_rng(0)

    print(f"{n} points per call, best of 7 runs")
    print(f"{'kernel':<28}{'pure (ms)':>12}{'compiled (ms)':>15}{'speedup':>9}")

    cases = []
    for k in (2, 8):
        t = rng.uniform(-k - 0.5, k + 0.5, n)
        cases.append((f"lambda_k (k={k})",
                      lambda t=t, k=k: _pure.lambda_k(t, k),
                      (lambda t=t, k=k: _core.lambda_k(t, k))
                      if _core else None))

    act = ActivationKind.srelu(3, use_table=True)
    coeffs, x0, h = act._table()
    t = rng.uniform(-1.0, 1.0, n)
    cases.append(("srelu table apply (k=3)",
                  lambda: _pure.srelu_spline_apply(t, coeffs, x0, h, 0.5),
                  (lambda: _core.srelu_spline_apply(t, coeffs, x0, h, 0.5))
                  if _core else None))

    for name, pure_fn, core_fn in cases:
        pure_ms = best_of(pure_fn) * 1e3
        if core_fn is None:
            print(f"{name:<28}{pure_ms:>12.2f}{'n/a':>15}{'':>9}")
            continue
        err = np.max(np.abs(pure_fn() - core_fn()))
        # Summation-order roundoff in the alternating sum grows with k and
        # reaches ~1e-9 at k = 8.
        assert err < 1e-8, f"backend mismatch {err:.2e} in {name}"
        core_ms = best_of(core_fn) * 1e3
        print(f"{name:<28}{pure_ms:>12.2f}{core_ms:>15.2f}"
              f"{pure_ms / core_ms:>8.1f}x")

    if _core is None:
        print("compiled core unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
