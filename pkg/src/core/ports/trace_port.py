"""TracePort Protocol - Sink for the per-run discovery trace.

Every CI test and every orientation decision of a discovery run can be
recorded as one TraceRecord. The JSON-lines adapter writes them to disk;
tests use an in-memory recorder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol, runtime_checkable

from src.core.domain.graph import NodeRef, node_sort_key

TRACE_ACTIONS = ("kept", "removed", "middle", "degenerate", "oriented", "conflict")


@dataclass(frozen=True)
class TraceRecord:
    """One traced event.

    Attributes:
        phase: Algorithm step, e.g. "ancestral", "nonancestral", "ER0a", "vote"
        x: First node of the pair
        y: Second node of the pair
        cond: Conditioning set of the test (empty for orientation events)
        p_value: p-value of the test, None for orientation events
        statistic: Absolute statistic of the test, None for orientation events
        action: One of TRACE_ACTIONS
    """

    phase: str
    x: NodeRef
    y: NodeRef
    cond: frozenset[NodeRef]
    p_value: float | None
    statistic: float | None
    action: str

    def __post_init__(self) -> None:
        if self.action not in TRACE_ACTIONS:
            raise ValueError(f"Trace action must be one of {TRACE_ACTIONS}. Got: {self.action}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "phase": self.phase,
            "x": self.x.to_list(),
            "y": self.y.to_list(),
            "cond": [node.to_list() for node in sorted(self.cond, key=node_sort_key)],
            "p_value": self.p_value,
            "statistic": self.statistic,
            "action": self.action,
        }


@runtime_checkable
class TracePort(Protocol):
    """Abstract sink for trace records.

    Implementations:
    - TraceRecorder: JSON-lines file writer with an in-memory copy
    """

    def record(self, entry: TraceRecord) -> None:
        """Store one record. Must not raise for well-formed records."""
        ...
