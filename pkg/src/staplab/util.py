"""Small shared helpers: worker-count resolution and an order-preserving map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(requested: int | None = None) -> int:
    """Worker count from the explicit request, else STAP_THREADS, else 1."""
    if requested is not None:
        n = int(requested)
    else:
        env = os.environ.get("STAP_THREADS", "")
        n = int(env) if env.strip() else 1
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    return n


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map fn over items, returning results in input order.

    With threads == 1 this is a plain loop. With more, items run on a thread
    pool; results are still collected in submission order, so output never
    depends on scheduling. Items must not share mutable state.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
