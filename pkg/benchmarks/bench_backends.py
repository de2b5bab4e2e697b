"""Time the numba and numpy implementations of each hot kernel on identical inputs.

    python benchmarks/bench_backends.py [--repeat N]

Both paths are called directly, so the ``RDKERNEL_DISABLE_NUMBA`` switch does
not matter here.  Each numba function is called once before timing to exclude
compilation.  Prints best-of-N wall time per path, the speedup and the largest
absolute difference between the two outputs.
"""

import argparse
import time

import numpy as np

from rdkernel.fhn import FHNParams
from rdkernel.kernels import memory_integrand
from rdkernel.model import ModelParams
from rdkernel.oracle import _fhn_run_nb, _fhn_run_np
from rdkernel.solver import weighted_history
from rdkernel.specfun import NUMBA_IMPLS, NUMPY_IMPLS
from rdkernel.tables import TableRule, hat_tables


def best_of(fn, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    rng = np.random.default_rng(0)
    p = ModelParams(1.0, 2.0, 0.5, 1.0)

    z = rng.uniform(0.0, 60.0, 200_000)
    yield "bessel j0 map (2e5 pts)", lambda b: (NUMBA_IMPLS if b == "numba" else NUMPY_IMPLS)["j0"](z)

    x = rng.uniform(-3, 3, 2000)
    t = rng.uniform(0.1, 5, 2000)
    u = np.linspace(0.0, 1.0, 150)[1:]
    yield "memory integrand (149 x 2000 x 3)", lambda b: memory_integrand(x, t, p, backend=b)(u)

    lags = 0.01 * np.arange(1, 101)
    yield "hat tables (100 lags, M=240)", lambda b: np.stack(hat_tables(lags, 240, 0.05, p, TableRule(), b))

    ks = rng.standard_normal((400, 1025)) + 1j * rng.standard_normal((400, 1025))
    fs = rng.standard_normal((400, 1025)) + 1j * rng.standard_normal((400, 1025))
    yield "weighted history (400 levels)", lambda b: weighted_history(ks, fs, 1, 399, 0, 399, b)

    fp = FHNParams.of(0.25, 0.01, 0.5, 1.0)
    xg = np.linspace(-25, 25, 1001)
    dx = xg[1] - xg[0]
    dt = 0.4 * dx * dx / 2.0

    def fd(b):
        fn = _fhn_run_nb if b == "numba" else _fhn_run_np
        return np.stack(fn(0.6 * np.exp(-xg ** 2), np.zeros_like(xg), 2000, 100, dt,
                           fp.eps, fp.a, fp.b, fp.beta, dx, False))

    yield "FHN RK4 oracle (2000 steps)", fd


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'kernel':36s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, run in cases():
        run("numba")  # compile
        tn, on = best_of(lambda: run("numba"), args.repeat)
        tp, op = best_of(lambda: run("numpy"), args.repeat)
        diff = float(np.max(np.abs(np.asarray(on) - np.asarray(op))))
        print(f"{name:36s} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
