"""Benchmark the compiled power-iteration kernel against the numpy
fallback: raw iteration throughput and end-to-end estimator latency.

Usage: python benchmarks/bench_kernels.py [--sizes 500,1000,2000] [--seed 0]
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from gnpest.estimators import robust_estimate_symmetric
from gnpest.graphs import GraphParams, sample_er
from gnpest.linalg import kernel
from gnpest.rng import stream


def bench_power_iteration(n: int, seed: int, reps: int = 5) -> dict:
    g = sample_er(GraphParams(n=n, p=0.5, gamma=0.0), stream(seed, "bench", n))
    idx = np.arange(n, dtype=np.int64)
    x0 = stream(seed, "bench", n, "x").normal(size=n)
    x0 /= np.linalg.norm(x0)
    out = {}
    for name in kernel.available_backends():
        times, iters = [], 0
        for _ in range(reps):
            t0 = time.perf_counter()
            _, _, it, _ = kernel.power_iteration(
                g, idx, 0.5, x0.copy(), 200, 1e-6, backend=name
            )
            times.append(time.perf_counter() - t0)
            iters = it
        best = min(times)
        out[name] = {"per_matvec_ms": 1e3 * best / max(iters, 1), "total_s": best}
    return out


def bench_estimator(n: int, seed: int) -> dict:
    g = sample_er(GraphParams(n=n, p=0.5, gamma=0.0), stream(seed, "pipe", n))
    out = {}
    for name in kernel.available_backends():
        os.environ["GNPEST_KERNEL"] = name
        t0 = time.perf_counter()
        robust_estimate_symmetric(g, 1 / 60, stream(seed, "pipe", n, name), repeats=1)
        out[name] = time.perf_counter() - t0
    os.environ.pop("GNPEST_KERNEL", None)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="500,1000,2000")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = kernel.available_backends()
    print(f"backends: {', '.join(backends)} (default: {kernel.backend_name()})")
    print()
    print(f"{'n':>6}  " + "  ".join(f"{b + ' ms/matvec':>14}" for b in backends) + f"  {'speedup':>8}")
    for n in sizes:
        r = bench_power_iteration(n, args.seed)
        cells = "  ".join(f"{r[b]['per_matvec_ms']:14.3f}" for b in backends)
        speed = (
            f"{r['py']['per_matvec_ms'] / r['c']['per_matvec_ms']:7.2f}x"
            if "c" in r
            else "     n/a"
        )
        print(f"{n:>6}  {cells}  {speed}")

    print()
    print(f"{'n':>6}  " + "  ".join(f"{b + ' pipeline s':>14}" for b in backends))
    for n in sizes:
        r = bench_estimator(n, args.seed)
        print(f"{n:>6}  " + "  ".join(f"{r[b]:14.2f}" for b in backends))
    return 0


if __name__ == "__main__":
    sys.exit(main())
