"""Deterministic fan-out over independent work items.

Work items must already own their randomness (child streams indexed by
item), so the thread count changes scheduling only: results are collected
in item order and are bit-identical at any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, threads: int = 1) -> list:
    """Map ``fn`` over ``items`` preserving order; serial when threads <= 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
