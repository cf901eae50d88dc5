"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

The numba timings exclude the first (compiling) call.
"""
import argparse
import timeit

import numpy as np

from lumilink import kernels
from lumilink.modem import CONSTELLATION, PARITY_CHECK, SYNDROME_TABLE


def cases():
    rng = np.random.default_rng(0)
    y = CONSTELLATION[rng.integers(0, 16, 1_000_000)] + 0.2 * (
        rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000))
    words = rng.integers(0, 2, (500_000, 7)).astype(np.uint8)
    x = rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)
    k = np.tan(np.pi * 0.05)
    b, a1 = k / (1 + k), (k - 1) / (k + 1)
    return [
        ("demap 1e6 symbols", lambda f: f(y, CONSTELLATION),
         kernels.demap_nearest_numba, kernels.demap_nearest_numpy),
        ("syndrome 5e5 words", lambda f: f(words, PARITY_CHECK, SYNDROME_TABLE),
         kernels.syndrome_correct_numba, kernels.syndrome_correct_numpy),
        ("one-pole filter 1e6 complex", lambda f: f(x, b, b, a1),
         kernels.one_pole_filter_numba, kernels.one_pole_filter_numpy),
        ("simpson 65536 panels", lambda f: f(20e3, 65536, 27.0, 1.7e-14),
         kernels.simpson_cn2_z53_numba, kernels.simpson_cn2_z53_numpy),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<30}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, call, fast, slow in cases():
        call(fast)  # compile
        t_fast = min(timeit.repeat(lambda: call(fast), number=1, repeat=args.repeat)) * 1e3
        t_slow = min(timeit.repeat(lambda: call(slow), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<30}{t_fast:>12.2f}{t_slow:>12.2f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
