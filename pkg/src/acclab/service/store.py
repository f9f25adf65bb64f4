"""Event-sourced store: the single writer and the lock-free readers.

All mutations go through ``append`` (or several of them inside one
``transaction``), which serializes writers, persists the event, and swaps
in the reduced state.  ``state`` is an immutable-by-convention snapshot:
handlers copy what they change, so a reference obtained at any moment
stays internally consistent.
"""

from __future__ import annotations

import threading
import time
from contextlib import contextmanager
from pathlib import Path

from . import state as reducers
from .events import EventLog, canonical_json, envelope

SNAPSHOT_EVERY = 200


class Store:
    def __init__(self, data_dir: str | Path, clock=time.time,
                 snapshot_every: int = SNAPSHOT_EVERY):
        self._lock = threading.RLock()
        self._clock = clock
        self._snapshot_every = snapshot_every
        self.log = EventLog(data_dir)
        events = self.log.open()
        self.state = reducers.replay(events)

    @contextmanager
    def transaction(self):
        """Serialize a read-check-append sequence against other writers."""
        with self._lock:
            yield

    def append(self, type_: str, data: dict, actor: str) -> dict:
        with self._lock:
            env = envelope(self.state["seq"] + 1, self._clock(), actor, type_, data)
            self.log.append(env)
            self.state = reducers.apply_event(self.state, env)
            if self._snapshot_every and env["seq"] % self._snapshot_every == 0:
                self.log.write_snapshot(self.state)
            return env

    def write_snapshot(self) -> Path:
        with self._lock:
            return self.log.write_snapshot(self.state)

    def canonical_state(self) -> bytes:
        return canonical_json(self.state).encode("utf-8")

    def close(self) -> None:
        self.log.close()
