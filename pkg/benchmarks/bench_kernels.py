"""Time every kernel under each available backend.

    python3 benchmarks/bench_kernels.py [--length 1000000] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from ergolab._kernels import BACKENDS


def cases(length, rng):
    bits = rng.integers(0, 2, length).astype(np.uint8)
    u = rng.random(length)
    p1 = rng.random(1 << 4)
    P = rng.random((5, 5))
    cum = np.cumsum(P / P.sum(axis=1, keepdims=True), axis=1)
    return {
        "block_codes(k=8)": lambda m: m.block_codes(bits, 8),
        "block_counts(k=8)": lambda m: m.block_counts(bits, 8),
        "sample_context_chain(k=4)": lambda m: m.sample_context_chain(p1, 4, 0, u),
        "sample_finite_chain(5)": lambda m: m.sample_finite_chain(cum, 0, u),
        "sample_walk_chain": lambda m: m.sample_walk_chain(0, u),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--length", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    names = sorted(BACKENDS)
    print(f"{'kernel':28s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, fn in cases(args.length, rng).items():
        times = {}
        for n in names:
            times[n] = min(timeit.repeat(lambda: fn(BACKENDS[n]), number=1, repeat=args.repeat))
        row = f"{label:28s}" + "".join(f"{times[n] * 1e3:10.1f}ms" for n in names)
        if "cython" in times:
            row += f"  {times['python'] / times['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
