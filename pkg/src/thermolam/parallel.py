"""Deterministic data-parallel mapping over frequency grids.

Frequency scans are embarrassingly parallel.  Results are reduced in
grid order regardless of completion order, so runs with different
thread counts produce byte-identical output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "THERMOLAM_THREADS"


def thread_count(requested=None) -> int:
    """Resolve the worker count: explicit argument, else environment
    variable ``THERMOLAM_THREADS``, else the machine's core count."""
    if requested is not None:
        n = int(requested)
    else:
        env = os.environ.get(ENV_THREADS, "").strip()
        n = int(env) if env else (os.cpu_count() or 1)
    return max(1, n)


def parallel_map(fn, items, threads=None) -> list:
    """Map ``fn`` over ``items``, preserving order."""
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
