#!/usr/bin/env python3
"""Compare the compiled and pure-Python execution kernels.

Usage: python benchmarks/bench_exec.py [--batch 50] [--ticks 50] [--reps 20]
"""

import argparse
import time

import numpy as np

from isbst.fbd import build_ramp_diagram, execute_batch, random_ramp_inputs
from isbst.fbd.executor import BACKEND
from isbst.metrics import lcs_length
from isbst.fbd import _exec_py


def time_backend(diagram, x, backend, reps):
    execute_batch(diagram, x, backend=backend)  # warm up / compile cache
    t0 = time.perf_counter()
    for _ in range(reps):
        out = execute_batch(diagram, x, backend=backend)
    dt = (time.perf_counter() - t0) / reps
    return dt, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=50)
    ap.add_argument("--ticks", type=int, default=50)
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    diagram = build_ramp_diagram()
    rng = np.random.default_rng(0)
    x = random_ramp_inputs(rng, ticks=args.ticks, batch=args.batch)

    print(f"ramp diagram: {len(diagram.blocks)} blocks, batch={args.batch}, T={args.ticks}")
    results = {}
    backends = ["python"] + (["compiled"] if BACKEND == "compiled" else [])
    outputs = {}
    for backend in backends:
        dt, out = time_backend(diagram, x, backend, args.reps)
        results[backend] = dt
        outputs[backend] = out
        per_eval = dt / args.batch * 1e6
        print(f"  {backend:<9} {dt * 1e3:8.2f} ms/batch   {per_eval:8.1f} us/candidate")
    if len(backends) == 2:
        assert np.array_equal(outputs["python"], outputs["compiled"]), "kernel mismatch!"
        print(f"  speedup: {results['python'] / results['compiled']:.1f}x (outputs identical)")
    else:
        print("  compiled kernel not built; only the fallback was timed")

    # LCS kernel
    a = rng.integers(0, 2, 50).astype(np.int64)
    b = rng.integers(0, 2, 50).astype(np.int64)
    t0 = time.perf_counter()
    for _ in range(2000):
        lcs_length(a, b)
    fast = (time.perf_counter() - t0) / 2000
    t0 = time.perf_counter()
    for _ in range(200):
        _exec_py.lcs_length(a, b)
    slow = (time.perf_counter() - t0) / 200
    print(f"lcs(50,50): active {fast * 1e6:.1f} us, pure-python {slow * 1e6:.1f} us")


if __name__ == "__main__":
    main()
