"""Append-only event log: the system's single audit trail.

Every mutating operation anywhere in the orchestrator emits exactly one or
more events here; the CLI, API stream, and UI all read from this log.
"""

from __future__ import annotations

import json
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Optional

CATEGORIES = ("device", "task", "instance", "scale", "bgp")
SEVERITIES = ("info", "warn", "error")


@dataclass(frozen=True)
class EventRecord:
    seq: int
    timestamp: float
    category: str
    payload: dict
    severity: str = "info"

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "category": self.category,
            "severity": self.severity,
            "payload": self.payload,
        }


class EventLog:
    """In-memory ring of recent events plus optional append-only file."""

    def __init__(self, capacity: int = 10_000, path: Optional[str] = None):
        self._events: deque[EventRecord] = deque(maxlen=capacity)
        self._seq = 0
        self._cond = threading.Condition()
        self._path = path

    def emit(self, category: str, payload: dict, severity: str = "info") -> EventRecord:
        assert category in CATEGORIES, category
        assert severity in SEVERITIES, severity
        with self._cond:
            self._seq += 1
            record = EventRecord(self._seq, time.time(), category, payload, severity)
            self._events.append(record)
            if self._path:
                with open(self._path, "a") as fh:
                    fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
            self._cond.notify_all()
        return record

    @property
    def max_seq(self) -> int:
        with self._cond:
            return self._seq

    def since(self, seq: int = 0) -> list[EventRecord]:
        with self._cond:
            return [e for e in self._events if e.seq > seq]

    def wait_since(self, seq: int, timeout: float) -> list[EventRecord]:
        """Long-poll helper: block until an event newer than seq arrives."""
        deadline = time.monotonic() + timeout
        with self._cond:
            while self._seq <= seq:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._cond.wait(remaining)
            return [e for e in self._events if e.seq > seq]
