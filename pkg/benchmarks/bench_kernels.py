"""Compare the compiled and numpy zero-forcing kernels on identical batches.

    python benchmarks/bench_kernels.py [--trials 100000] [--n 4] [--k 3]
"""

import argparse
import time

import numpy as np

from cogmimo import kernels


def _batch(trials, n, k, seed):
    gen = np.random.Generator(np.random.Philox(seed))
    shape = (trials, n, k)
    est = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2)
    err = 0.1 * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2)
    return est, err, np.ones(trials)


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    est, err, noise = _batch(args.trials, args.n, args.k, 1)
    results = {}
    for backend in kernels.available_backends():
        secs, (snr, valid) = _time(
            lambda b=backend: kernels.zf_snr_batch(est, err, noise, backend=b), args.repeats
        )
        results[backend] = snr
        print(f"{backend:>7}: {secs:.4f} s  ({args.trials / secs:,.0f} trials/s)")
    if len(results) == 2:
        a, b = results["cython"], results["numpy"]
        rel = np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))
        print(f"max relative difference: {rel:.2e}")
    else:
        print("compiled kernel not available; only the numpy backend was timed")


if __name__ == "__main__":
    main()
