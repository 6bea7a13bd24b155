"""
Batch dispatcher for backend requests.

This module fans batches of work out to backend transports with a bounded number
of requests in flight and optional rate limiting. Results are
reassembled in input order no matter which request finishes first.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Generic, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

ProgressCallback = Callable[[int, int, str], None]


@dataclass
class BatchOutcome(Generic[R]):
    """Result of one dispatched batch: either ``result`` or ``error`` is set."""
    index: int
    result: Optional[R] = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def chunked(items: Sequence[T], size: int) -> List[Sequence[T]]:
    """
    Split a sequence into consecutive chunks of at most ``size`` items.

    Raises:
        ValueError: If size is not positive
    """
    if size <= 0:
        raise ValueError(f"batch size must be positive, got {size}")
    return [items[i:i + size] for i in range(0, len(items), size)]


class BatchDispatcher:
    """
    Dispatches batches to a worker function with bounded concurrency.

    Attributes:
        max_in_flight: Maximum number of concurrent requests
        rate_limit_per_sec: Maximum request starts per second (0 = unlimited)
    """

    def __init__(self, max_in_flight: int = 1, rate_limit_per_sec: float = 0.0):
        """
        Initialize the BatchDispatcher.

        Args:
            max_in_flight: Concurrent request limit (>= 1)
            rate_limit_per_sec: Request start rate limit, 0 disables it
        """
        if max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
        if rate_limit_per_sec < 0:
            raise ValueError(f"rate_limit_per_sec must be >= 0, got {rate_limit_per_sec}")
        self.max_in_flight = int(max_in_flight)
        self.rate_limit_per_sec = float(rate_limit_per_sec)
        self.running = False
        self._lock = threading.Lock()
        self._rate_lock = threading.Lock()
        self._next_start = 0.0

    def _wait_for_slot(self) -> None:
        if self.rate_limit_per_sec <= 0:
            return
        interval = 1.0 / self.rate_limit_per_sec
        with self._rate_lock:
            now = time.monotonic()
            wait = self._next_start - now
            self._next_start = max(now, self._next_start) + interval
        if wait > 0:
            time.sleep(wait)

    def _run_one(self, index: int, batch: Any, worker: Callable[[Any], R]) -> BatchOutcome:
        self._wait_for_slot()
        try:
            return BatchOutcome(index=index, result=worker(batch))
        except Exception as e:  # recorded per batch, callers decide
            logger.debug("Batch %d failed: %r", index, e)
            return BatchOutcome(index=index, error=e)

    def dispatch(
        self,
        batches: Sequence[Any],
        worker: Callable[[Any], R],
        callback: Optional[ProgressCallback] = None,
    ) -> List[BatchOutcome]:
        """
        Run ``worker`` on every batch and return outcomes in input order.

        Args:
            batches: Work items, one request each
            worker: Function performing one request
            callback: Optional progress callback.
                      Signature: callback(done_batches, total_batches, message)

        Returns:
            List[BatchOutcome]: One outcome per batch, same order as ``batches``

        Raises:
            RuntimeError: If this dispatcher is already running
        """
        with self._lock:
            if self.running:
                raise RuntimeError("Dispatcher is already running")
            self.running = True

        total = len(batches)
        outcomes: List[Optional[BatchOutcome]] = [None] * total
        try:
            if self.max_in_flight == 1 or total <= 1:
                for index, batch in enumerate(batches):
                    outcomes[index] = self._run_one(index, batch, worker)
                    if callback:
                        callback(index + 1, total, f"Batch {index + 1}/{total} done")
            else:
                done = 0
                with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                    futures = [pool.submit(self._run_one, i, b, worker) for i, b in enumerate(batches)]
                    for future in futures:
                        outcome = future.result()
                        outcomes[outcome.index] = outcome
                        done += 1
                        if callback:
                            callback(done, total, f"Batch {done}/{total} done")
            return [o for o in outcomes if o is not None]
        finally:
            with self._lock:
                self.running = False
