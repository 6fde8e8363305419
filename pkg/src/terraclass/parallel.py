"""Deterministic chunked execution over the pixel index range.

Workers partition the range into contiguous chunks; partial results are
always combined in chunk order, so output depends only on the worker count
(and per-pixel results not at all). Default is one worker; the
``TERRACLASS_WORKERS`` environment variable overrides it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

_ENV = "TERRACLASS_WORKERS"


def worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    raw = os.environ.get(_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{_ENV} must be a positive integer, got {raw!r}") from None


def chunk_bounds(n: int, workers: int) -> list[tuple[int, int]]:
    """Split ``range(n)`` into at most ``workers`` contiguous chunks."""
    workers = min(max(1, workers), max(1, n))
    base, rem = divmod(n, workers)
    bounds = []
    lo = 0
    for i in range(workers):
        hi = lo + base + (1 if i < rem else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def map_chunks(fn: Callable[[int, int], T], n: int, workers: int) -> list[T]:
    """Apply ``fn(lo, hi)`` per chunk; results returned in chunk order."""
    bounds = chunk_bounds(n, workers)
    if len(bounds) == 1:
        return [fn(*bounds[0])]
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
