"""TraceRecorder - JSON-lines sink for discovery traces.

Keeps every record in memory and, if a path is given, appends one JSON
object per line to the trace file.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO

from src.core.ports.trace_port import TraceRecord


class TraceRecorder:
    """Collects trace records and optionally streams them to a file.

    Attributes:
        records: Every record received, in order
        path: Output file, None for in-memory use
    """

    def __init__(self, path: str | Path | None = None) -> None:
        self.records: list[TraceRecord] = []
        self.path = Path(path) if path is not None else None
        self._handle: IO[str] | None = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = self.path.open("w", encoding="utf-8")

    def record(self, entry: TraceRecord) -> None:
        self.records.append(entry)
        if self._handle is not None:
            self._handle.write(json.dumps(entry.to_dict()) + "\n")

    def actions(self) -> dict[str, int]:
        """Record counts per action."""
        counts: dict[str, int] = {}
        for entry in self.records:
            counts[entry.action] = counts.get(entry.action, 0) + 1
        return counts

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __enter__(self) -> TraceRecorder:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
