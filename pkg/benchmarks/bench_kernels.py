#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel on a sized-up synthetic workload and reports both
backends' timings plus the speedup, verifying bit-identical outputs along
the way. Usage: python benchmarks/bench_kernels.py [--n 2000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from d2dsim import _kernels_py as pyk

try:
    from d2dsim import _kernels as cyk
except ImportError:
    cyk = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n, repeat):
    r = np.random.Generator(np.random.PCG64(7))
    u1, u2 = r.random(n), r.random(n)
    xs = np.empty(n)
    ys = np.empty(n)
    pyk.sector_points(u1, u2, 500.0, -1.0471975511965976, 2.0943951023931953, 0.0, 0.0, xs, ys)
    pa = np.empty(n // 2 + 1, dtype=np.int64)
    pb = np.empty(n // 2 + 1, dtype=np.int64)
    n_dst = max(n // 10, 1)
    dst_x = xs[:n_dst] + 0.5  # keep every source/destination distance > 0
    dst_y = ys[:n_dst] + 0.5
    gm = np.empty((n_dst, n))
    k_rb = r.integers(1, 6, size=n).astype(np.int64)
    wedges = np.empty(n, dtype=np.int64)
    pyk.sector_wedges(xs, ys, 0.0, 0.0, -1.0471975511965976, wedges)

    cases = {
        "sector_points": lambda k: (
            lambda out_x=np.empty(n), out_y=np.empty(n): k.sector_points(
                u1, u2, 500.0, -1.0, 2.0, 0.0, 0.0, out_x, out_y
            )
            or (out_x, out_y)
        )(),
        "greedy_pairs": lambda k: k.greedy_pairs(xs, ys, 20.0, pa, pb),
        "gain_matrix": lambda k: k.gain_matrix(xs, ys, dst_x, dst_y, 20.0, 2000.0, gm) or gm.copy(),
        "cotier_sum": lambda k: sum(
            k.cotier_sum(v, xs, ys, xs, ys, xs, ys, k_rb, wedges, 50.0, 0.126, 20.0, 2000.0, True)
            for v in range(0, n, max(n // 50, 1))
        ),
    }

    print(f"workload n = {n}, best of {repeat}")
    print(f"{'kernel':<14}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py, out_py = _time(lambda: call(pyk), repeat)
        if cyk is None:
            print(f"{name:<14}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'n/a':>10}")
            continue
        t_cy, out_cy = _time(lambda: call(cyk), repeat)
        if isinstance(out_py, tuple):
            same = all(np.array_equal(a, b) for a, b in zip(out_py, out_cy))
        elif isinstance(out_py, np.ndarray):
            same = np.array_equal(out_py, out_cy)
        else:
            same = out_py == out_cy
        flag = "" if same else "  MISMATCH!"
        print(f"{name:<14}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms{t_py / t_cy:>9.1f}x{flag}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    bench(args.n, args.repeat)
