"""OracleCheckService - LPCMCI with perfect CI decisions against the true PAG.

This service coordinates:
1. LPCMCI runs on the d-separation oracle of each model
2. Comparison of the output with the true PAG (or a given expected graph)
3. Optional LPCMCI-PAG validation after every algorithm step
4. Random model batches for repeated checks
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.adapters.cached_ci_adapter import CachedCIAdapter
from src.adapters.oracle_ci_adapter import OracleCIAdapter
from src.core.domain.discovery_config import DiscoveryConfig, Method
from src.core.domain.discovery_state import DiscoveryState
from src.core.domain.graph import WindowGraph
from src.core.domain.ground_truth import GroundTruthModel
from src.core.domain.model_config import ModelConfig
from src.core.services.discovery_service import DiscoveryRequest, DiscoveryService
from src.core.services.pag_validation import validate_lpcmci_pag
from src.core.services.simulation_service import random_model

logger = logging.getLogger(__name__)


def random_check_models(
    n_models: int,
    seed: int,
    n_total_range: tuple[int, int] = (3, 6),
    p_ts: int = 2,
    latent_fraction: float = 0.3,
) -> list[GroundTruthModel]:
    """Random linear models with between n_total_range[0] and n_total_range[1] variables."""
    low, high = n_total_range
    if not 1 <= low <= high:
        raise ValueError(f"n_total_range must satisfy 1 <= low <= high. Got: {n_total_range}")
    rng = np.random.default_rng(seed)
    models = []
    for _ in range(n_models):
        cfg = ModelConfig(
            n_total=int(rng.integers(low, high + 1)),
            p_ts=p_ts,
            latent_fraction=latent_fraction,
        )
        models.append(random_model(cfg, int(rng.integers(2**32))))
    return models


@dataclass(frozen=True)
class OracleCheckRequest:
    """Request parameters for an oracle check.

    Attributes:
        models: Models to check
        tau_max: Analysis window
        k: Preliminary ancestral iterations
        expected: Graph to compare against instead of each model's true PAG
        validate_steps: Validate the LPCMCI-PAG after every step
    """

    models: tuple[GroundTruthModel, ...]
    tau_max: int = 2
    k: int = 0
    expected: WindowGraph | None = None
    validate_steps: bool = False

    def __post_init__(self) -> None:
        if not self.models:
            raise ValueError("OracleCheckRequest needs at least one model")
        if self.expected is not None and len(self.models) != 1:
            raise ValueError("An expected graph can only be given for a single model")


@dataclass
class ModelCheck:
    """Outcome for one model."""

    index: int
    passed: bool
    diff: list[str] = field(default_factory=list)
    step_violations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "passed": self.passed,
            "diff": list(self.diff),
            "step_violations": list(self.step_violations),
        }


@dataclass
class OracleCheckResponse:
    checks: list[ModelCheck]

    @property
    def n_passed(self) -> int:
        return sum(check.passed for check in self.checks)

    @property
    def all_passed(self) -> bool:
        return self.n_passed == len(self.checks)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_models": len(self.checks),
            "n_passed": self.n_passed,
            "checks": [check.to_dict() for check in self.checks if not check.passed],
        }


class OracleCheckService:
    """Checks LPCMCI's oracle output against ground truth.

    Oracles are kept per model and window, so repeated checks of the same
    models (e.g. for several k) reuse the d-separation and CI caches.
    """

    def __init__(self) -> None:
        self._oracles: dict[
            tuple[int, int], tuple[GroundTruthModel, OracleCIAdapter, CachedCIAdapter]
        ] = {}

    def oracle_for(
        self, model: GroundTruthModel, tau_max: int
    ) -> tuple[OracleCIAdapter, CachedCIAdapter]:
        """Oracle CI test of a model at a window, and its caching wrapper."""
        key = (id(model), tau_max)
        if key not in self._oracles or self._oracles[key][0] is not model:
            oracle_ci = OracleCIAdapter.from_truth(model, tau_max)
            self._oracles[key] = (model, oracle_ci, CachedCIAdapter(oracle_ci))
        _, oracle_ci, cached = self._oracles[key]
        return oracle_ci, cached

    def check(self, request: OracleCheckRequest) -> OracleCheckResponse:
        """Execute the check for every model.

        Workflow:
        1. Build the oracle CI test and the expected graph
        2. Run LPCMCI, validating intermediate graphs when asked
        3. Compare the output with the expected graph
        """
        # Phase caps would stop the oracle run short of the true PAG
        config = DiscoveryConfig(
            tau_max=request.tau_max,
            k=request.k,
            max_cond_ancestral=None,
            max_cond_nonancestral=None,
        )
        checks = []
        for index, model in enumerate(request.models):
            # Step 1: Oracle and expectation
            oracle_ci, ci = self.oracle_for(model, request.tau_max)
            oracle = oracle_ci.oracle
            expected = request.expected or oracle.true_pag()

            # Step 2: Run
            violations: list[str] = []

            def validate(step: str, state: DiscoveryState) -> None:
                violations.extend(f"{step}: {v}" for v in validate_lpcmci_pag(state.graph, oracle))

            service = DiscoveryService(ci, observer=validate if request.validate_steps else None)
            response = service.discover(DiscoveryRequest(len(model.observed), config, Method.LPCMCI))

            # Step 3: Compare
            diff = response.graph.diff(expected)
            passed = not diff and not violations
            if not passed:
                logger.info("Oracle check of model %d failed with %d differences", index, len(diff))
            checks.append(ModelCheck(index, passed, diff, violations))
        return OracleCheckResponse(checks)


def create_oracle_check_service() -> OracleCheckService:
    """Factory function to create OracleCheckService."""
    return OracleCheckService()
