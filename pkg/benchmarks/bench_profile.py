#!/usr/bin/env python3
"""Benchmark the deviation-profile kernels: compiled extension vs numpy.

Usage: python benchmarks/bench_profile.py [--repeats R]

Times both backends on a grid of (series length, components, window) and
reports the per-profile wall time and speedup.  The numbers matter because
change point detection evaluates one profile per bootstrap replicate, so
detection cost is essentially (n_boot + 1) * profile time.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nonstat import _profile_np
from nonstat.spectral import smoothing_matrix

try:
    from nonstat import _profile_cy
except ImportError:
    _profile_cy = None

GRID = [
    (600, 1, 64),
    (600, 2, 64),
    (600, 5, 64),
    (1200, 2, 64),
    (2400, 2, 128),
    (2400, 5, 256),
]


def time_call(func, *args, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--mode", choices=["plain", "relative"], default="relative")
    args = parser.parse_args()

    attr = "deviation_profile" if args.mode == "plain" else "relative_deviation_profile"
    print(f"deviation-profile benchmark ({args.mode} statistic, best of {args.repeats})")
    header = f"{'T':>6} {'L':>3} {'N':>5} {'numpy':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    rng = np.random.default_rng(0)
    for t_len, n_comp, window in GRID:
        data = np.ascontiguousarray(rng.standard_normal((t_len, n_comp)))
        weights = smoothing_matrix(window)
        np_fn = getattr(_profile_np, attr)
        t_np = time_call(np_fn, data, window, weights, repeats=args.repeats)
        if _profile_cy is not None:
            cy_fn = getattr(_profile_cy, attr)
            t_cy = time_call(cy_fn, data, window, weights, repeats=args.repeats)
            ref = np_fn(data, window, weights)
            out = cy_fn(data, window, weights)
            assert np.allclose(ref, out, rtol=1e-9), "backends disagree"
            print(
                f"{t_len:>6} {n_comp:>3} {window:>5} {t_np * 1e3:>10.2f}ms "
                f"{t_cy * 1e3:>10.2f}ms {t_np / t_cy:>8.1f}x"
            )
        else:
            print(f"{t_len:>6} {n_comp:>3} {window:>5} {t_np * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
    if _profile_cy is None:
        print("\ncompiled extension not built; install with `pip install -e .` to compare")


if __name__ == "__main__":
    main()
