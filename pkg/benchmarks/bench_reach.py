#!/usr/bin/env python3
"""Compare the numba and numpy BFS kernels, then time an end-to-end validate.

    python benchmarks/bench_reach.py [--nodes N] [--degree D] [--repeat R]
"""
import argparse
import time

import numpy as np

from ssikit import build_model, validate
from ssikit.kernels import bfs_distances_numba, bfs_distances_numpy, build_csr


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def grid_model(side):
    """A side x side board; moves go right/down, a reset returns to the corner."""
    states = [f"c{r}_{c}" for r in range(side) for c in range(side)]
    trans = []
    for r in range(side):
        for c in range(side):
            s = f"c{r}_{c}"
            if c + 1 < side:
                trans.append((s, "right", f"c{r}_{c + 1}"))
            if r + 1 < side:
                trans.append((s, "down", f"c{r + 1}_{c}"))
            trans.append((s, "reset", "c0_0"))
    return build_model(states, ["right", "down", ("reset", "game", 1)], trans, ["c0_0"])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=1_000_000)
    ap.add_argument("--degree", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--side", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n, m = args.nodes, args.nodes * args.degree
    indptr, indices = build_csr(n, rng.integers(0, n, m), rng.integers(0, n, m))
    blocked = np.zeros(n, dtype=np.bool_)
    sources = np.array([0], dtype=np.int64)

    bfs_distances_numba(indptr, indices, sources, blocked)  # compile
    t_numba, d1 = best_of(lambda: bfs_distances_numba(indptr, indices, sources, blocked), args.repeat)
    t_numpy, d2 = best_of(lambda: bfs_distances_numpy(indptr, indices, sources, blocked), args.repeat)
    assert np.array_equal(d1, d2)
    print(f"BFS  nodes={n:,} edges={indices.size:,} reached={(d1 >= 0).sum():,}")
    print(f"  numba  {t_numba * 1e3:9.2f} ms")
    print(f"  numpy  {t_numpy * 1e3:9.2f} ms   ({t_numpy / t_numba:.1f}x numba)")

    t0 = time.perf_counter()
    model = grid_model(args.side)
    t_build = time.perf_counter() - t0
    t_val, space = best_of(lambda: validate(model), 1)
    print(f"validate  grid {args.side}x{args.side} ({len(model.states):,} states, {model.edge_count():,} edges)")
    print(f"  build {t_build:.2f} s, validate {t_val:.2f} s -> {type(space).__name__}")


if __name__ == "__main__":
    main()
