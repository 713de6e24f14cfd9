"""Port interfaces for the LPCMCI engine.

Ports define abstract interfaces that adapters must implement.
Following hexagonal architecture, core depends only on ports.
"""

from src.core.ports.ci_port import (
    CIQuery,
    CIQueryError,
    CIResult,
    CITestError,
    CITestPort,
    DegenerateTestError,
    InsufficientSamplesError,
)
from src.core.ports.trace_port import TracePort, TraceRecord

__all__ = [
    # CITestPort
    "CITestPort",
    "CIQuery",
    "CIResult",
    "CITestError",
    "CIQueryError",
    "DegenerateTestError",
    "InsufficientSamplesError",
    # TracePort
    "TracePort",
    "TraceRecord",
]
