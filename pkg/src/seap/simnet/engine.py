"""Discrete-event clock with deterministic tie-breaking."""

from __future__ import annotations

import heapq
import itertools
from typing import Any, Callable


class SimClock:
    """Priority queue of callbacks keyed by (time, insertion order).

    Time is integer milliseconds and never decreases.
    """

    def __init__(self, start_ms: int = 0):
        self.now = start_ms
        self._queue: list[tuple[int, int, Callable[..., Any], tuple]] = []
        self._seq = itertools.count()

    def __len__(self) -> int:
        return len(self._queue)

    def schedule_at(self, at_ms: int, fn: Callable[..., Any], *args: Any) -> None:
        at_ms = int(at_ms)
        if at_ms < self.now:
            raise ValueError(f"cannot schedule in the past ({at_ms} < {self.now})")
        heapq.heappush(self._queue, (at_ms, next(self._seq), fn, args))

    def schedule(self, delay_ms: int, fn: Callable[..., Any], *args: Any) -> None:
        self.schedule_at(self.now + int(delay_ms), fn, *args)

    def peek_time(self):
        return self._queue[0][0] if self._queue else None

    def step(self) -> bool:
        if not self._queue:
            return False
        at, _, fn, args = heapq.heappop(self._queue)
        self.now = at
        fn(*args)
        return True

    def run(self, until_ms: int, stop: Callable[[], bool] = lambda: False) -> None:
        """Process events with time <= ``until_ms`` until ``stop()`` holds or the queue drains."""
        while self._queue and self._queue[0][0] <= until_ms and not stop():
            self.step()
