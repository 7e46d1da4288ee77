#!/usr/bin/env python3
"""Benchmark the compiled chain kernel against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--samples 8192] [--max-order 8]
"""
import argparse
import time

import numpy as np

from eitcbs.engine import _variates
from eitcbs.kernels import build_tables, get_backend
from eitcbs.levels import ControlCoupling, LevelScheme
from eitcbs.medium import CloudGeometry


def time_backend(backend, tables, chunks, max_order, repeats=3):
    backend.run_steady_chunk(tables, chunks[0], max_order)  # warm up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for u in chunks:
            backend.run_steady_chunk(tables, u, max_order)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=8192)
    ap.add_argument("--max-order", type=int, default=8)
    ap.add_argument("--rabi", type=float, default=0.5)
    ap.add_argument("--delta", type=float, default=1.0)
    args = ap.parse_args()

    scheme = LevelScheme()
    cloud = CloudGeometry(3.2e10, 0.5)
    tables = build_tables(args.delta, ControlCoupling(args.rabi), scheme, cloud)
    chunk = 1024
    n_chunks = (args.samples + chunk - 1) // chunk
    chunks = [_variates(1, i, chunk, args.max_order) for i in range(n_chunks)]
    total = chunk * n_chunks

    results = {}
    for name in ("numpy", "compiled"):
        try:
            backend = get_backend(name)
        except RuntimeError as exc:
            print(f"{name:>9s}: unavailable ({exc})")
            continue
        dt = time_backend(backend, tables, chunks, args.max_order)
        results[name] = dt
        print(
            f"{name:>9s}: {dt:8.3f} s for {total} samples x {args.max_order} orders "
            f"({dt / total * 1e6:7.1f} us/sample)"
        )
    if len(results) == 2:
        print(f"  speedup: {results['numpy'] / results['compiled']:.2f}x")


if __name__ == "__main__":
    main()
