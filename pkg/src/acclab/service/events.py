"""Append-only event log: one canonical JSON document per line.

Canonical form (sorted keys, minimal separators, raw unicode) makes
re-serialization byte-stable, which is what the replay and snapshot
equality guarantees are built on.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

LOG_NAME = "events.jsonl"
SNAPSHOT_PREFIX = "snapshot-"


class StoreCorruptError(RuntimeError):
    """The event log is damaged beyond the recoverable trailing line."""


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def envelope(seq: int, ts: float, actor: str, type_: str, data: dict) -> dict:
    return {"seq": seq, "ts": ts, "actor": actor, "type": type_, "data": data}


class EventLog:
    """Single-writer append log with fsync-per-append durability.

    A torn trailing line (crash mid-write) is dropped and truncated away at
    open; any earlier damage raises.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / LOG_NAME
        self._fh = None
        self.last_seq = 0

    def open(self) -> list[dict]:
        """Read every intact event, truncate a torn tail, open for append."""
        events = []
        good_end = 0
        if self.path.exists():
            with open(self.path, "rb") as fh:
                raw = fh.read()
            offset = 0
            while offset < len(raw):
                newline = raw.find(b"\n", offset)
                if newline < 0:
                    break  # torn tail, no terminator
                line = raw[offset:newline]
                try:
                    event = json.loads(line.decode("utf-8"))
                except (ValueError, UnicodeDecodeError) as exc:
                    if newline == len(raw) - 1:
                        break  # damaged final line: treat as torn
                    raise StoreCorruptError(
                        f"{self.path}: bad event at byte {offset}: {exc}") from exc
                # a prefix of a JSON object never parses, so anything that
                # parses but misnumbers the sequence is real damage, not a
                # torn write
                if not isinstance(event, dict) or event.get("seq") != len(events) + 1:
                    raise StoreCorruptError(
                        f"{self.path}: sequence break at byte {offset}")
                events.append(event)
                good_end = newline + 1
                offset = newline + 1
            if good_end != len(raw):
                with open(self.path, "r+b") as fh:
                    fh.truncate(good_end)
        self._fh = open(self.path, "ab")
        self.last_seq = len(events)
        return events

    def append(self, event: dict) -> None:
        if self._fh is None:
            raise RuntimeError("log not opened")
        if event["seq"] != self.last_seq + 1:
            raise StoreCorruptError(
                f"append out of order: {event['seq']} after {self.last_seq}")
        self._fh.write((canonical_json(event) + "\n").encode("utf-8"))
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self.last_seq = event["seq"]

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    # snapshots ----------------------------------------------------------

    def snapshot_path(self, seq: int) -> Path:
        return self.directory / f"{SNAPSHOT_PREFIX}{seq:012d}.json"

    def write_snapshot(self, state: dict) -> Path:
        path = self.snapshot_path(state["seq"])
        tmp = path.with_suffix(".tmp")
        data = canonical_json(state).encode("utf-8")
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        return path

    def snapshots(self) -> list[Path]:
        return sorted(self.directory.glob(f"{SNAPSHOT_PREFIX}*.json"))
