"""Append-only event log with replay.

Events are JSON objects, one per line, each carrying a sequence number,
timestamp, schema version, type, and payload. Events are never mutated or
deleted; service state is a pure fold over the event sequence, which makes
crash recovery and audits trivial at experiment scale.
"""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Callable, Iterator

SCHEMA_VERSION = 1


class EventLog:
    """JSONL-backed log; pass path=None for a purely in-memory log."""

    def __init__(self, path: str | Path | None = None, clock: Callable[[], float] = time.time):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self._events: list[dict] = []
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._events.append(json.loads(line))
        self._fh = self.path.open("a", encoding="utf-8") if self.path is not None else None

    @classmethod
    def from_events(cls, events: list[dict]) -> "EventLog":
        """In-memory log preloaded with existing events (for replay tests)."""
        log = cls(None)
        log._events = list(events)
        return log

    def events(self) -> list[dict]:
        return list(self._events)

    def append(self, event_type: str, payload: dict) -> dict:
        event = {
            "seq": len(self._events),
            "ts": self.clock(),
            "version": SCHEMA_VERSION,
            "type": event_type,
            "payload": payload,
        }
        self._events.append(event)
        if self._fh is not None:
            self._fh.write(json.dumps(event, sort_keys=True) + "\n")
            self._fh.flush()
        return event

    def __iter__(self) -> Iterator[dict]:
        return iter(list(self._events))

    def __len__(self) -> int:
        return len(self._events)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


__all__ = ["EventLog", "SCHEMA_VERSION"]
