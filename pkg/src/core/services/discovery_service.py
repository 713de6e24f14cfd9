"""DiscoveryService - Runs one causal discovery method on one CI test.

This service coordinates:
1. Result caching and test bookkeeping around the CI test
2. Dispatch to LPCMCI, LPCMCI without the non-ancestral phase, SVAR-FCI or SVAR-RFCI
3. Run summary: runtime, number of tests, largest conditioning set, I^min
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

from src.adapters.cached_ci_adapter import CachedCIAdapter
from src.core.domain.discovery_config import DiscoveryConfig, Method
from src.core.domain.discovery_state import DiscoveryState
from src.core.domain.graph import MiddleMark, WindowGraph
from src.core.services import lpcmci_service, svarfci_service
from src.core.services.separation import CIRunner

if TYPE_CHECKING:
    from src.core.ports.ci_port import CITestPort
    from src.core.ports.trace_port import TracePort
    from src.core.services.lpcmci_service import StepObserver

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscoveryRequest:
    """Request parameters for one discovery run.

    Attributes:
        n_vars: Number of observed variables
        config: Run parameters
        method: Discovery method
    """

    n_vars: int
    config: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    method: Method = Method.LPCMCI

    def __post_init__(self) -> None:
        if self.n_vars < 1:
            raise ValueError(f"n_vars must be positive. Got: {self.n_vars}")


@dataclass
class DiscoveryResponse:
    """Result of one discovery run.

    Attributes:
        graph: Estimated PAG
        method: Method that produced it
        runtime_seconds: Wall time of the run
        n_tests: Distinct CI tests executed
        max_cardinality: Largest conditioning set tested
        n_degenerate: Degenerate tests treated as dependent
        imin: Minimum absolute statistic per canonical pair (LPCMCI only)
        warnings: Conditions worth reporting to the caller
    """

    graph: WindowGraph
    method: Method
    runtime_seconds: float
    n_tests: int
    max_cardinality: int
    n_degenerate: int = 0
    imin: dict[tuple[int, int, int], float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def summary(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "edges": self.graph.summary(),
            "n_edges": len(self.graph),
            "runtime_seconds": round(self.runtime_seconds, 4),
            "n_tests": self.n_tests,
            "max_cardinality": self.max_cardinality,
            "n_degenerate": self.n_degenerate,
            "warnings": list(self.warnings),
        }


class DiscoveryService:
    """Orchestrates a discovery run on a given CI test."""

    def __init__(
        self,
        ci_port: "CITestPort",
        trace_port: "TracePort | None" = None,
        observer: "StepObserver | None" = None,
    ) -> None:
        """Initialize DiscoveryService.

        Args:
            ci_port: CI test, wrapped in a result cache for each run
            trace_port: Optional sink for the per-test trace
            observer: Optional callback after every LPCMCI step
        """
        self._ci_port = ci_port
        self._trace_port = trace_port
        self._observer = observer

    def discover(self, request: DiscoveryRequest) -> DiscoveryResponse:
        """Execute the requested method.

        Workflow:
        1. Wrap the CI test in a fresh cache
        2. Run the method
        3. Collect bookkeeping and warnings
        """
        # Step 1: Cache
        ci = CachedCIAdapter(self._ci_port)
        config = request.config
        logger.info(
            "Running %s on %d variables (tau_max=%d, alpha=%g)",
            request.method.value,
            request.n_vars,
            config.tau_max,
            config.alpha,
        )
        started = time.perf_counter()

        # Step 2: Method
        imin: dict[tuple[int, int, int], float] = {}
        n_degenerate = 0
        if request.method in (Method.LPCMCI, Method.LPCMCI_ANCESTRAL):
            if request.method == Method.LPCMCI_ANCESTRAL:
                config = replace(config, run_nonancestral=False)
            runner = CIRunner(ci, config.alpha, self._trace_port)
            state = lpcmci_service.lpcmci(
                DiscoveryState.initial(request.n_vars, config), runner, self._observer
            )
            graph = state.graph
            imin = state.sepsets.imin_snapshot()
            n_degenerate = runner.n_degenerate
        elif request.method == Method.SVARFCI:
            graph = svarfci_service.run_svarfci(ci, request.n_vars, config, self._trace_port)
        else:
            graph = svarfci_service.run_svarrfci(ci, request.n_vars, config, self._trace_port)
        runtime = time.perf_counter() - started

        # Step 3: Bookkeeping
        warnings: list[str] = []
        unresolved = graph.middle_marks() - {MiddleMark.EMPTY}
        if unresolved:
            warnings.append(
                "Output keeps middle marks "
                + ", ".join(sorted(repr(m.value) for m in unresolved))
                + "; adjacencies with '!' are not certified"
            )
        if n_degenerate:
            warnings.append(f"{n_degenerate} degenerate CI tests treated as dependent")
        logger.info(
            "%s done in %.2fs: %d edges, %d CI tests",
            request.method.value,
            runtime,
            len(graph),
            ci.n_tests,
        )
        return DiscoveryResponse(
            graph=graph,
            method=request.method,
            runtime_seconds=runtime,
            n_tests=ci.n_tests,
            max_cardinality=ci.overall_max_cardinality,
            n_degenerate=n_degenerate,
            imin=imin,
            warnings=warnings,
        )


def create_discovery_service(
    ci_port: "CITestPort",
    trace_port: "TracePort | None" = None,
    observer: "StepObserver | None" = None,
) -> DiscoveryService:
    """Factory function to create DiscoveryService."""
    return DiscoveryService(ci_port=ci_port, trace_port=trace_port, observer=observer)
