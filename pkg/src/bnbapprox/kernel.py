"""Selects the pivot kernel at import time.

The compiled Cython kernel is preferred; the pure-Python fallback has the
same contract and is used when the extension is missing or when
BNBAPPROX_PURE_PYTHON=1 is set (useful for benchmarking the two against
each other, see benchmarks/bench_pivot.py).
"""
from __future__ import annotations

import os

if os.environ.get("BNBAPPROX_PURE_PYTHON") == "1":
    from ._pivot_py import pivot

    KERNEL = "python"
else:
    try:
        from ._pivot_cy import pivot  # type: ignore[no-redef]

        KERNEL = "cython"
    except ImportError:
        from ._pivot_py import pivot  # type: ignore[no-redef]

        KERNEL = "python"

__all__ = ["pivot", "KERNEL"]
