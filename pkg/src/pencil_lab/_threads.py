"""Sweep fan-out helper.  Worker count is capped by the PENCIL_LAB_THREADS
environment variable; results are returned in input order regardless of
completion order, so parallel sweeps stay deterministic."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("PENCIL_LAB_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return min(4, os.cpu_count() or 1)


def map_sizes(fn: Callable, sizes: Sequence, threads: Optional[int] = None) -> list:
    """Apply fn to each size, optionally across worker threads."""
    workers = worker_count(threads)
    items = list(sizes)
    if workers <= 1 or len(items) <= 1:
        return [fn(s) for s in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
