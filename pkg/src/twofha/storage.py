"""Append-only JSON-lines persistence with replay and atomic compaction.

Both servers persist through this: an append-only log of records, replayed
into memory on startup, rewritten in place (tmp file + rename) once the log
grows well past the live set. Inspectable with any text tool.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable, Iterator
from pathlib import Path

from .errors import StorageFailure

COMPACT_MIN_LINES = 1024
COMPACT_RATIO = 4  # compact when log lines exceed ratio * live entries


class AppendLog:
    """A single-writer append-only log of JSON records."""

    def __init__(self, path: str | Path, fsync: bool = True):
        self.path = Path(path)
        self.fsync = fsync
        self.lines = 0
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            # count existing lines so the compaction heuristic survives restarts
            if self.path.exists():
                with self.path.open("rb") as f:
                    self.lines = sum(1 for _ in f)
        except OSError as exc:
            raise StorageFailure(f"cannot open log {self.path}: {exc}") from exc

    def append(self, record: dict) -> int:
        """Append one record durably; returns its line offset."""
        line = json.dumps(record, separators=(",", ":"), sort_keys=True)
        try:
            with self.path.open("a", encoding="utf-8") as f:
                f.write(line + "\n")
                f.flush()
                if self.fsync:
                    os.fsync(f.fileno())
        except OSError as exc:
            raise StorageFailure(f"cannot append to {self.path}: {exc}") from exc
        offset = self.lines
        self.lines += 1
        return offset

    def replay(self) -> Iterator[dict]:
        if not self.path.exists():
            return
        try:
            with self.path.open("r", encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if line:
                        yield json.loads(line)
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"cannot replay {self.path}: {exc}") from exc

    def should_compact(self, live_entries: int) -> bool:
        return (
            self.lines >= COMPACT_MIN_LINES
            and self.lines > COMPACT_RATIO * max(live_entries, 1)
        )

    def compact(self, records: Iterable[dict]) -> None:
        """Atomically rewrite the log to exactly the given records."""
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        count = 0
        try:
            with tmp.open("w", encoding="utf-8") as f:
                for record in records:
                    f.write(json.dumps(record, separators=(",", ":"), sort_keys=True) + "\n")
                    count += 1
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, self.path)
        except OSError as exc:
            tmp.unlink(missing_ok=True)
            raise StorageFailure(f"cannot compact {self.path}: {exc}") from exc
        self.lines = count
