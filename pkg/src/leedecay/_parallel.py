"""Deterministic chunked mapping with an optional thread pool.

``LEEDECAY_WORKERS`` caps the number of worker threads (default: CPU count,
at most 8).  Chunk boundaries never depend on the worker count, so results
are bit-identical for any setting.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_WORKERS = "LEEDECAY_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(ENV_WORKERS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{ENV_WORKERS} must be a positive integer, got {raw!r}") from None
    return max(1, min(8, os.cpu_count() or 1))


def chunked(n: int, size: int) -> list[slice]:
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def pmap(fn, items):
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
