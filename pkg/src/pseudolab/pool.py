"""
pool.py

The pool module defines WorkerPool, the thread pool every data-parallel
sweep in pseudolab is delegated to.  Results always come back in input
order, so aggregated values do not depend on scheduling.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# -----------------------------------------------------------------------


def default_thread_count() -> int:
    """Return the thread count used when no hint is given.

    @return: number of CPUs visible to the process, at least 1
    """
    return max(1, os.cpu_count() or 1)


class WorkerPool:
    """
    A thread pool sized by a thread-count hint.  A hint of 1 runs every
    task inline in the calling thread.
    """

    def __init__(self, threads: Optional[int] = None):
        """
        @param threads: number of worker threads, defaults to the CPU count
        @raises ValueError: if threads is not positive
        """
        if threads is None:
            threads = default_thread_count()
        if threads < 1:
            raise ValueError("thread count must be positive")
        self._threads = int(threads)
        self._executor = None

    def __enter__(self) -> "WorkerPool":
        if self._threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=self._threads)
            logger.debug("started %d worker threads", self._threads)
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()

    @property
    def threads(self) -> int:
        return self._threads

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply func to every item and return the results in input order.

        @param func: a side-effect free function
        @param items: the task inputs
        @return: list of results, results[i] = func(items[i])
        """
        items = list(items)
        if self._threads == 1 or len(items) < 2:
            return [func(item) for item in items]
        if self._executor is not None:
            return list(self._executor.map(func, items))
        with ThreadPoolExecutor(max_workers=self._threads) as executor:
            return list(executor.map(func, items))

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


def run_parallel(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Convenience wrapper: map func over items on a temporary pool.

    @param func: a side-effect free function
    @param items: the task inputs
    @param threads: thread-count hint, defaults to the CPU count
    @return: list of results in input order
    """
    with WorkerPool(threads) as pool:
        return pool.map(func, items)
