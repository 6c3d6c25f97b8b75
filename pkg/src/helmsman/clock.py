"""Injectable time sources.

Every time-driven component in the platform (pollers, stream generators,
motion progress, throttle flushes, waits) schedules callbacks through a
clock object instead of touching the wall clock directly. Two
implementations share the same interface:

* :class:`SimClock` — manually advanced, fully deterministic. Timer
  callbacks run in the thread that calls :meth:`SimClock.advance`.
* :class:`WallClock` — a background scheduler thread fires timers in real
  time.

Timestamps are milliseconds as floats, counted from clock creation.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import threading
import time
from typing import Callable

logger = logging.getLogger(__name__)


class TimerHandle:
    """Cancellation token for a scheduled callback."""

    __slots__ = ("when", "callback", "cancelled")

    def __init__(self, when: float, callback: Callable[[], None]):
        self.when = when
        self.callback = callback
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


class SimClock:
    """Simulated clock; time only moves when advance() is called."""

    def __init__(self, start_ms: float = 0.0):
        self._now = start_ms
        self._heap: list[tuple[float, int, TimerHandle]] = []
        self._seq = itertools.count()
        self._lock = threading.Lock()

    def now_ms(self) -> float:
        with self._lock:
            return self._now

    def call_at(self, when_ms: float, callback: Callable[[], None]) -> TimerHandle:
        handle = TimerHandle(when_ms, callback)
        with self._lock:
            heapq.heappush(self._heap, (when_ms, next(self._seq), handle))
        return handle

    def call_later(self, delay_ms: float, callback: Callable[[], None]) -> TimerHandle:
        return self.call_at(self.now_ms() + max(0.0, delay_ms), callback)

    def cancel(self, handle: TimerHandle) -> None:
        handle.cancel()

    def advance(self, delta_ms: float) -> None:
        """Move time forward, firing due timers in order.

        Callbacks run in the calling thread with no locks held, so they may
        schedule further timers (including ones due before the target).
        """
        with self._lock:
            target = self._now + max(0.0, delta_ms)
        while True:
            with self._lock:
                if not self._heap or self._heap[0][0] > target:
                    break
                when, _, handle = heapq.heappop(self._heap)
                if handle.cancelled:
                    continue
                self._now = max(self._now, when)
            try:
                handle.callback()
            except Exception:
                logger.exception("timer callback failed")
        with self._lock:
            self._now = target

    def pending_timers(self) -> int:
        with self._lock:
            return sum(1 for _, _, h in self._heap if not h.cancelled)


class WallClock:
    """Real-time clock backed by a daemon scheduler thread."""

    def __init__(self):
        self._t0 = time.monotonic()
        self._heap: list[tuple[float, int, TimerHandle]] = []
        self._seq = itertools.count()
        self._cond = threading.Condition()
        self._closed = False
        self._thread: threading.Thread | None = None

    def now_ms(self) -> float:
        return (time.monotonic() - self._t0) * 1000.0

    def call_at(self, when_ms: float, callback: Callable[[], None]) -> TimerHandle:
        handle = TimerHandle(when_ms, callback)
        with self._cond:
            if self._closed:
                raise RuntimeError("clock is closed")
            heapq.heappush(self._heap, (when_ms, next(self._seq), handle))
            if self._thread is None:
                self._thread = threading.Thread(
                    target=self._run, name="helmsman-clock", daemon=True
                )
                self._thread.start()
            self._cond.notify()
        return handle

    def call_later(self, delay_ms: float, callback: Callable[[], None]) -> TimerHandle:
        return self.call_at(self.now_ms() + max(0.0, delay_ms), callback)

    def cancel(self, handle: TimerHandle) -> None:
        handle.cancel()
        with self._cond:
            self._cond.notify()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify()

    def _run(self) -> None:
        while True:
            with self._cond:
                if self._closed:
                    return
                while self._heap and self._heap[0][2].cancelled:
                    heapq.heappop(self._heap)
                if not self._heap:
                    self._cond.wait(timeout=1.0)
                    continue
                due = self._heap[0][0] - self.now_ms()
                if due > 0:
                    self._cond.wait(timeout=due / 1000.0)
                    continue
                _, _, handle = heapq.heappop(self._heap)
            if handle.cancelled:
                continue
            try:
                handle.callback()
            except Exception:
                logger.exception("timer callback failed")


def wait_ms(clock, delay_ms: float, *, wall_timeout_s: float = 30.0) -> None:
    """Block the calling thread for ``delay_ms`` of clock time.

    Must not be called from the thread that advances a SimClock.
    """
    done = threading.Event()
    clock.call_later(delay_ms, done.set)
    if not done.wait(timeout=wall_timeout_s):
        raise TimeoutError(f"clock wait of {delay_ms} ms never fired")
