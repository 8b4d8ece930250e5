#!/usr/bin/env python3
"""Benchmark the compiled pivot kernel against the pure-Python fallback.

Two views: a micro-benchmark of the pivot loop on synthetic tableaus, and
an end-to-end parametric-search benchmark run in subprocesses so the
kernel selection (import-time, BNBAPPROX_PURE_PYTHON=1 forces the
fallback) applies to the whole solver.

Usage: python benchmarks/bench_pivot.py [--rows 14] [--cols 60] [--iters 300]
"""
import argparse
import os
import random
import subprocess
import sys
import time

from bnbapprox._pivot_py import pivot as pivot_py

try:
    from bnbapprox._pivot_cy import pivot as pivot_cy
except ImportError:
    pivot_cy = None


def bench_micro(rows: int, cols: int, iters: int) -> None:
    rnd = random.Random(1)

    def fresh():
        return [[rnd.randint(-10**6, 10**6) for _ in range(cols)] for _ in range(rows)]

    variants = [("python", pivot_py)]
    if pivot_cy is not None:
        variants.append(("cython", pivot_cy))
    for name, fn in variants:
        tableaus = [fresh() for _ in range(iters)]
        start = time.perf_counter()
        for tab in tableaus:
            den = 1
            for step in range(min(rows, 8)):
                c = step % cols
                if tab[step][c] == 0:
                    tab[step][c] = 1 + step
                if tab[step][c] < 0:
                    tab[step] = [-v for v in tab[step]]
                den = fn(tab, step, c, den)
        elapsed = time.perf_counter() - start
        pivots = iters * min(rows, 8)
        print(f"micro  {name:>7}: {elapsed:.3f}s for {pivots} pivots "
              f"({elapsed / pivots * 1e6:.1f} us/pivot)", flush=True)


_END_TO_END = r"""
import time
from bnbapprox.kernel import KERNEL
from bnbapprox.instances import generate
from bnbapprox.scheduling import min_feasible_T
start = time.perf_counter()
total = 0
for seed in range(40):
    inst = generate("scheduling-unrelated", 10, 4, seed)
    res = min_feasible_T(inst.processing, inst.overheads, range(inst.n))
    total += res.t_min.numerator
print(f"end-to-end {KERNEL:>7}: {time.perf_counter() - start:.3f}s "
      f"(40 parametric searches, checksum {total})")
"""


def bench_end_to_end() -> None:
    for pure in ("0", "1"):
        env = dict(os.environ, BNBAPPROX_PURE_PYTHON=pure)
        subprocess.run([sys.executable, "-c", _END_TO_END], env=env, check=True)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=14)
    parser.add_argument("--cols", type=int, default=60)
    parser.add_argument("--iters", type=int, default=300)
    args = parser.parse_args()
    if pivot_cy is None:
        print("note: compiled kernel unavailable, micro-bench covers the fallback only")
    bench_micro(args.rows, args.cols, args.iters)
    bench_end_to_end()


if __name__ == "__main__":
    main()
