#!/usr/bin/env python3
"""Time the numba solver kernel against the pure-numpy fallback.

Runs the same weight-sweep workload under both backends and prints a small
table.  Usage:

    python benchmarks/backend_benchmark.py [--n 400] [--alphas 25] [--repeats 3]
"""

import argparse
import os
import time

import numpy as np


def run_sweep(n, n_alphas):
    from rocsvm.data import stratified_split
    from rocsvm.kernels import KernelSpec
    from rocsvm.roc import sweep
    from rocsvm.rngs import make_rng
    from rocsvm.solver import TrainConfig
    from rocsvm.synth import GenModel, generate

    data = generate(GenModel(p=3, q=0.3), n, make_rng(1234))
    train, test = stratified_split(data, 0.7, make_rng(5678))
    results = {}
    for name, kernel in (("linear", KernelSpec("linear")),
                         ("gaussian", KernelSpec("gaussian", bandwidth_gamma=1.0 / 3))):
        cfg = TrainConfig(alpha_weight=0.5, lambda_=1.0 / (2 * train.n), kernel=kernel)
        t0 = time.perf_counter()
        res = sweep(train, test, cfg, np.linspace(0.05, 0.95, n_alphas))
        results[name] = (time.perf_counter() - t0, sum(m.n_updates for m in res.models))
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=400)
    parser.add_argument("--alphas", type=int, default=25)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"weight sweep benchmark: n={args.n}, {args.alphas} grid points, "
          f"best of {args.repeats}")
    timings = {}
    for backend in ("numba", "numpy"):
        os.environ["ROCSVM_BACKEND"] = backend
        run_sweep(60, 5)  # warm-up (and JIT compile for numba)
        best = {}
        for _ in range(args.repeats):
            for kernel, (secs, updates) in run_sweep(args.n, args.alphas).items():
                if kernel not in best or secs < best[kernel][0]:
                    best[kernel] = (secs, updates)
        timings[backend] = best
    print(f"\n{'kernel':10s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s} {'updates':>9s}")
    for kernel in ("linear", "gaussian"):
        tn = timings["numba"][kernel][0]
        tp = timings["numpy"][kernel][0]
        print(f"{kernel:10s} {tn:9.3f}s {tp:9.3f}s {tp / tn:8.1f}x {timings['numba'][kernel][1]:9d}")


if __name__ == "__main__":
    main()
