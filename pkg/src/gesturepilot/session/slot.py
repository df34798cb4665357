"""Single-slot mailbox with newest-wins replacement.

The ingest reader and the tick loop meet here: the reader puts every
frame it parses, the tick loop takes at most one per tick.  A new put
silently replaces an unconsumed value, which is exactly the teleoperation
backpressure rule — acting on a stale pose is worse than skipping it,
and the queue can never grow.
"""

from __future__ import annotations

import threading
from typing import Generic, TypeVar

T = TypeVar("T")


class LatestSlot(Generic[T]):
    def __init__(self):
        self._lock = threading.Lock()
        self._value: T | None = None
        self._closed = False
        self._dropped = 0

    def put(self, value: T) -> None:
        """Store a value, replacing (and counting) any unconsumed one."""
        with self._lock:
            if self._value is not None:
                self._dropped += 1
            self._value = value

    def take(self) -> T | None:
        """Remove and return the stored value, or None if empty."""
        with self._lock:
            value = self._value
            self._value = None
            return value

    def close(self) -> None:
        with self._lock:
            self._closed = True

    @property
    def closed(self) -> bool:
        with self._lock:
            return self._closed

    @property
    def dropped(self) -> int:
        """Frames overwritten before anyone took them."""
        with self._lock:
            return self._dropped
