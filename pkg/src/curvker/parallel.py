"""Worker-pool helpers shared by the grid search and the energy sums."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, TypeVar

from .errors import ParameterError

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "CURVKER_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit count, else ``$CURVKER_THREADS``, else the machine's CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        try:
            threads = int(env) if env else (os.cpu_count() or 1)
        except ValueError:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if threads < 1:
        raise ParameterError("thread count must be >= 1")
    return threads


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly in parallel; results keep the input order."""
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
