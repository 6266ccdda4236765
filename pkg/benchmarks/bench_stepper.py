"""Time the Euler-Maruyama stepping kernels (compiled vs numpy fallback).

Usage:
    python benchmarks/bench_stepper.py [--n 30] [--steps 20000] [--repeat 5]

The timed region is exactly what ``simulator.simulate`` spends its time on:
one ``advance`` call over a pre-drawn noise array.  Reported numbers are
the best of ``--repeat`` runs.
"""

import argparse
import time

import numpy as np

from wavelqg import _kernels
from wavelqg.analysis import build_closed_loop
from wavelqg.params import NondimParams
from wavelqg.spectral import laplacian_circulant


def build_workload(n: int, steps: int, seed: int = 0):
    p = NondimParams(pi1=0.5, pi2=1.0, pi3=4.0, pi4=4.0, n=n)
    cl = build_closed_loop(p)
    m = np.ascontiguousarray(cl.augmented)
    lap = laplacian_circulant(n).dense()
    qbar = np.block([[np.eye(n) - p.pi1 * lap, np.zeros((n, n))],
                     [np.zeros((n, n)), p.pi2 * np.eye(n)]])
    kmat = np.hstack([cl.gain_k.block1.dense(), cl.gain_k.block2.dense()])
    krk = np.ascontiguousarray(kmat.T @ kmat / p.pi3 ** 2)
    rng = np.random.default_rng(seed)
    noise = 0.1 * rng.standard_normal((steps, 4 * n))
    z0 = rng.standard_normal(4 * n)
    return z0, m, np.ascontiguousarray(qbar), krk, noise


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=30, help="ring sites")
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    z0, m, qbar, krk, noise = build_workload(args.n, args.steps)
    dt = 0.005
    backends = _kernels.available_backends()
    print(f"n={args.n}, steps={args.steps}, state dim {4 * args.n}, "
          f"active backend: {_kernels.BACKEND}")

    results = {}
    for name, advance in backends.items():
        best = np.inf
        out = None
        for _ in range(args.repeat):
            z = z0.copy()
            t0 = time.perf_counter()
            out = advance(z, m, qbar, krk, noise, dt)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
        rate = args.steps / best
        print(f"  {name:7s} {best * 1e3:9.2f} ms   {rate:12.0f} steps/s   "
              f"cost integral {out[0]:.6g}")
    if "cython" in results:
        print(f"  speedup (cython over python): "
              f"{results['python'] / results['cython']:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
