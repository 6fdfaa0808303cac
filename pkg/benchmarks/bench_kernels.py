#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on representative workloads and prints a timing
table. The backend module picks its implementation at import time, so
this script calls both twins directly rather than flipping GBX_BACKEND.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from gbx import backend, kernels
from gbx.expr import compile_ast, parse_expression
from gbx.scenarios import BUMPY_LAMBDA_A


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--points", type=int, default=256 * 256)
    args = parser.parse_args()

    if not backend.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    n = args.points

    # workload 1: the bumpy conformal factor over a quadrature grid
    code, cargs, consts, depth = compile_ast(parse_expression(BUMPY_LAMBDA_A))
    us = rng.uniform(-1, 1, n)
    vs = rng.uniform(-1, 1, n)

    # workload 2: bilinear lookup on a sampled field
    grid = rng.normal(size=(512, 512))
    qu = rng.uniform(0, 1, n)
    qv = rng.uniform(0, 1, n)

    # workload 3: angle unwrap around a long loop
    phis = 2 * np.pi * np.arange(1 << 16) / (1 << 16)
    samples = np.mod(3 * phis + 0.1 * np.sin(5 * phis), 2 * np.pi)

    cases = [
        (
            f"eval_program ({len(code)} ops x {n} pts)",
            lambda: kernels.eval_program_numpy(code, cargs, consts, us, vs, depth),
            lambda: kernels.eval_program_numba(code, cargs, consts, us, vs, depth),
        ),
        (
            f"bilinear (512^2 grid x {n} pts)",
            lambda: kernels.bilinear_numpy(grid, 0, 1, 0, 1, qu, qv),
            lambda: kernels.bilinear_numba(grid, 0.0, 1.0, 0.0, 1.0, qu, qv),
        ),
        (
            f"unwrap_delta ({len(samples)} samples)",
            lambda: kernels.unwrap_delta_numpy(samples, 2 * np.pi),
            lambda: kernels.unwrap_delta_numba(samples, 2 * np.pi),
        ),
    ]

    kernels.warmup()
    for _, _, jit_fn in cases:
        jit_fn()  # compile outside the timed region

    print(f"{'kernel':44s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, np_fn, jit_fn in cases:
        t_np = timeit(np_fn, args.repeat)
        t_jit = timeit(jit_fn, args.repeat)
        print(f"{name:44s} {t_np * 1e3:9.2f}ms {t_jit * 1e3:9.2f}ms {t_np / t_jit:7.2f}x")

    # agreement spot check
    a = kernels.eval_program_numpy(code, cargs, consts, us, vs, depth)
    b = kernels.eval_program_numba(code, cargs, consts, us, vs, depth)
    print(f"max |numpy - numba| on eval_program: {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
