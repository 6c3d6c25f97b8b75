"""Per-subscription throttling with a bounded pending queue.

roslibjs-compatible semantics: a message emits immediately when at least
throttle_rate ms passed since the last emission, otherwise it queues.
The queue drains one message per throttle window (FIFO); when it would
exceed queue_length (> 0), the oldest queued message is dropped.
queue_length 0 means unbounded; throttle_rate 0 means emit everything.
"""

from __future__ import annotations

import threading
from collections import deque
from typing import Any

EMIT = "emit"
ENQUEUE = "enqueue"
DROP = "drop"


class ThrottleGate:
    def __init__(self, throttle_rate_ms: int = 0, queue_length: int = 0):
        self._lock = threading.Lock()
        self.throttle_rate = int(throttle_rate_ms)
        self.queue_length = int(queue_length)
        self._queue: deque[Any] = deque()
        self._last_emit: float | None = None

    def configure(self, throttle_rate_ms: int, queue_length: int) -> None:
        """Update parameters in place (re-subscribe semantics)."""
        with self._lock:
            self.throttle_rate = int(throttle_rate_ms)
            self.queue_length = int(queue_length)
            self._trim()

    def _trim(self) -> None:
        if self.queue_length > 0:
            while len(self._queue) > self.queue_length:
                self._queue.popleft()

    def offer(self, item: Any, now: float) -> str:
        """Feed one message; returns EMIT, ENQUEUE or DROP.

        EMIT means the caller must deliver ``item`` now. DROP means the
        item was queued and the oldest queued message fell off. A new
        message never emits while older ones are still queued (FIFO).
        """
        with self._lock:
            window_open = (self.throttle_rate <= 0 or self._last_emit is None
                           or now - self._last_emit >= self.throttle_rate)
            if window_open and not self._queue:
                self._last_emit = now
                return EMIT
            self._queue.append(item)
            if self.queue_length > 0 and len(self._queue) > self.queue_length:
                self._queue.popleft()
                return DROP
            return ENQUEUE

    def flush(self, now: float) -> Any | None:
        """Emit the oldest queued message if a throttle window elapsed."""
        with self._lock:
            if not self._queue:
                return None
            if self._last_emit is not None and (
                    now - self._last_emit < self.throttle_rate):
                return None
            self._last_emit = now
            return self._queue.popleft()

    def next_due(self) -> float | None:
        """Clock time of the next needed flush, or None when idle."""
        with self._lock:
            if not self._queue:
                return None
            if self._last_emit is None:
                return 0.0
            return self._last_emit + self.throttle_rate

    def pending(self) -> list[Any]:
        with self._lock:
            return list(self._queue)

    def clear(self) -> None:
        with self._lock:
            self._queue.clear()
