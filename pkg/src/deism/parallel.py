"""Deterministic chunked execution shared by every RTF driver.

Image paths are split into contiguous chunks of the deterministic ordering;
each (frequency, chunk) task yields a partial sum, and partials are reduced
in ascending chunk index. For a fixed chunk size the result is bit-identical
regardless of worker count; different chunk sizes regroup the floating-point
reduction and may differ at rounding level only.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

DEFAULT_CHUNK_SIZE = 2048


def resolve_workers(workers=None) -> int:
    """Worker count from the explicit argument, DEISM_WORKERS, or the host."""
    if workers is not None:
        n = int(workers)
    else:
        env = os.environ.get("DEISM_WORKERS", "").strip()
        if env:
            n = int(env)
        else:
            n = os.cpu_count() or 1
    if n < 1:
        raise ValueError("worker count must be at least 1")
    return n


def chunk_slices(n_items: int, chunk_size: int) -> list[slice]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be at least 1")
    return [slice(lo, min(lo + chunk_size, n_items)) for lo in range(0, n_items, chunk_size)]


def run_tasks(task_fn, keys, workers: int) -> dict:
    """Evaluate ``task_fn(key)`` for every key, possibly on a thread pool.

    Results come back keyed, so callers control the reduction order; the
    schedule never influences the arithmetic.
    """
    keys = list(keys)
    if workers <= 1 or len(keys) <= 1:
        return {key: task_fn(key) for key in keys}
    out = {}
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(task_fn, key): key for key in keys}
        for fut, key in futures.items():
            out[key] = fut.result()
    return out
