#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_backends.py [--size BYTES] [--repeat N]
"""

import argparse
import time

import numpy as np

from hbft import _kernels_py as pure

try:
    from hbft import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def make_cases(size, rng):
    data = rng.bytes(size)
    hashes = rng.integers(0, 2**64, size=4000, dtype=np.uint64)
    filt = np.zeros(256, np.uint8)
    pure.bloom_insert_many(filt, 11, hashes[:150])
    probes = np.concatenate([hashes[:40], hashes[2000:2040]])

    def packed(n):
        mat = np.zeros((n, 256), np.uint8)
        for i in range(n):
            pure.bloom_insert_many(mat[i], 11, hashes[i * 10:i * 10 + 150])
        pops = np.array([pure.popcount_bytes(row) for row in mat], np.int64)
        return np.ascontiguousarray(mat), pops

    fa, pa = packed(8)
    fb, pb = packed(8)
    offsets = np.arange(0, 9, 2, dtype=np.int64)
    return [
        (f"chunk_ends_and_hashes ({size // 1024} KiB)",
         lambda k: k.chunk_ends_and_hashes(data, 160)),
        ("bloom_insert_many (4000 hashes)",
         lambda k: k.bloom_insert_many(np.zeros(256, np.uint8), 11, hashes)),
        ("bloom_contains_run (80 probes)",
         lambda k: k.bloom_contains_run(filt, 11, probes, 4)),
        ("compare_packed (8x8 filters)",
         lambda k: k.compare_packed(fa, pa, fb, pb, 2048)),
        ("all_pairs_scores (4x4 digests)",
         lambda k: k.all_pairs_scores(fa, offsets, pa, fb, offsets, pb, 2048, 0)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=1024 * 1024,
                        help="input size for the chunking benchmark")
    parser.add_argument("--repeat", type=int, default=5,
                        help="repetitions per kernel (best time wins)")
    args = parser.parse_args()

    if compiled is None:
        print("compiled kernels unavailable; timing the pure backend only")
    rng = np.random.default_rng(12345)
    cases = make_cases(args.size, rng)

    width = max(len(name) for name, _ in cases)
    header = f"{'kernel':<{width}}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_pure = best_of(lambda: call(pure), args.repeat)
        if compiled is None:
            print(f"{name:<{width}}  {t_pure * 1e3:>8.3f}ms  {'-':>10}  {'-':>8}")
            continue
        t_comp = best_of(lambda: call(compiled), args.repeat)
        print(f"{name:<{width}}  {t_pure * 1e3:>8.3f}ms  {t_comp * 1e3:>8.3f}ms"
              f"  {t_pure / t_comp:>7.1f}x")


if __name__ == "__main__":
    main()
