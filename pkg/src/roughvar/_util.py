"""Small shared helpers (thread cap, parallel map)."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_cap", "parallel_map"]


def thread_cap() -> int:
    """Worker cap for parallel sweeps; ROUGHVAR_THREADS overrides."""
    raw = os.environ.get("ROUGHVAR_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def parallel_map(fn, items):
    """Map preserving order, threaded when the cap and item count allow."""
    items = list(items)
    cap = min(thread_cap(), len(items))
    if cap <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))
