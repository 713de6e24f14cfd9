"""BenchmarkService - Replicated method comparisons on random models.

This service coordinates:
1. Expansion of an experiment definition into grid cells
2. Independent replications per cell: model and data from the replication
   seed, the true PAG from the oracle, one discovery run, one score
3. Pooling of replication scores into cell reports, with failed replications
   recorded instead of raised

Replications run through joblib; results come back in seed order, so the
report does not depend on the number of workers apart from timing fields.
"""

from __future__ import annotations

import logging
import platform
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.adapters.gtest_adapter import GTestAdapter
from src.adapters.oracle_ci_adapter import OracleCIAdapter
from src.adapters.parcorr_adapter import ParCorrAdapter
from src.core.domain.discovery_config import DiscoveryConfig, Method
from src.core.domain.experiment_config import ExperimentCell, ExperimentConfig
from src.core.domain.graph import LinkClass, SlotKey
from src.core.domain.ground_truth import GroundTruthModel
from src.core.domain.metrics import Metrics
from src.core.ports.ci_port import CITestPort
from src.core.services.discovery_service import DiscoveryRequest, DiscoveryService
from src.core.services.oracle_service import true_pag
from src.core.services.scoring import compare_graphs
from src.core.services.simulation_service import random_model, sample, split_seed

logger = logging.getLogger(__name__)


def make_ci_test(name: str, data: Any, model: Any = None, tau_max: int = 0) -> CITestPort:
    """CI test by name; the oracle reads the model instead of the data."""
    if name == "parcorr":
        return ParCorrAdapter(data)
    if name == "gtest":
        return GTestAdapter(data)
    if name == "oracle":
        if model is None:
            raise ValueError("The oracle CI test needs the ground-truth model")
        return OracleCIAdapter.from_truth(model, tau_max)
    raise ValueError(f"Unknown CI test: {name}")


@dataclass
class ReplicationResult:
    """Outcome of one replication: metrics on success, the error message otherwise."""

    seed: int
    metrics: Metrics | None = None
    error: str | None = None


def run_replication(cell: ExperimentCell, seed: int) -> ReplicationResult:
    """Simulate, discover and score one replication; never raises."""
    try:
        model_seed, data_seed = split_seed(seed)
        model = random_model(cell.model, model_seed)
        data = None if cell.ci == "oracle" else sample(model, cell.T, data_seed)
        truth = true_pag(model.graph, cell.tau_max)
        ci = make_ci_test(cell.ci, data, model, cell.tau_max)
        response = DiscoveryService(ci).discover(
            DiscoveryRequest(len(model.observed), cell.discovery_config(), cell.method)
        )
        metrics = compare_graphs(response.graph, truth, response.imin)
        metrics.runtimes.append(response.runtime_seconds)
        metrics.n_tests.append(response.n_tests)
        metrics.max_cardinalities.append(response.max_cardinality)
        return ReplicationResult(seed=seed, metrics=metrics)
    except Exception as e:  # noqa: BLE001
        logger.warning("Replication seed=%d of %s failed: %s", seed, cell.label, e)
        return ReplicationResult(seed=seed, error=f"{type(e).__name__}: {e}")


@dataclass
class CellReport:
    """Pooled result of one grid cell.

    Attributes:
        cell: Cell definition as a dict
        metrics: Pooled metrics of the successful replications
        errors: Seed and message of every failed replication
        max_failure_rate: Failure share above which the cell is failed
    """

    cell: dict[str, Any]
    metrics: Metrics
    errors: list[tuple[int, str]] = field(default_factory=list)
    max_failure_rate: float = 0.1

    @property
    def n_failed(self) -> int:
        return len(self.errors)

    @property
    def status(self) -> str:
        total = self.metrics.n_runs + self.n_failed
        return "failed" if total and self.n_failed / total > self.max_failure_rate else "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "cell": self.cell,
            "status": self.status,
            "n_failed": self.n_failed,
            "errors": [{"seed": seed, "error": msg} for seed, msg in self.errors],
            "max_failure_rate": self.max_failure_rate,
            "metrics": self.metrics.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CellReport:
        return cls(
            cell=dict(data["cell"]),
            metrics=Metrics.from_dict(data["metrics"]),
            errors=[(int(e["seed"]), str(e["error"])) for e in data.get("errors", [])],
            max_failure_rate=float(data.get("max_failure_rate", 0.1)),
        )


def environment_metadata() -> dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "platform": platform.platform(),
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


@dataclass
class ExperimentReport:
    """Report of a whole experiment."""

    name: str
    experiment: dict[str, Any]
    cells: list[CellReport]
    environment: dict[str, str] = field(default_factory=dict)

    @property
    def failed_cells(self) -> list[CellReport]:
        return [cell for cell in self.cells if cell.status == "failed"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "experiment": self.experiment,
            "environment": dict(self.environment),
            "cells": [cell.to_dict() for cell in self.cells],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentReport:
        return cls(
            name=str(data["name"]),
            experiment=dict(data["experiment"]),
            cells=[CellReport.from_dict(c) for c in data["cells"]],
            environment=dict(data.get("environment", {})),
        )

    def to_frame(self) -> pd.DataFrame:
        """One row per cell and link class, for the CSV table."""
        rows = []
        for report in self.cells:
            cell = {k: v for k, v in report.cell.items() if k != "model"}
            model = {f"model.{k}": v for k, v in report.cell.get("model", {}).items()}
            runtime = report.metrics.runtime_summary()
            for cls in LinkClass:
                counts = report.metrics.classes[cls]
                rows.append(
                    {
                        **cell,
                        **model,
                        "status": report.status,
                        "n_runs": report.metrics.n_runs,
                        "n_failed": report.n_failed,
                        "link_class": cls.value,
                        "tpr": counts.tpr,
                        "fpr": counts.fpr,
                        "edgemark_recall": counts.edgemark_recall,
                        "edgemark_precision": counts.edgemark_precision,
                        "zero_counts": ";".join(counts.zero_counts),
                        "runtime_mean": runtime["mean"],
                        "runtime_low": runtime["low"],
                        "runtime_high": runtime["high"],
                    }
                )
        return pd.DataFrame(rows)


@dataclass(frozen=True)
class BenchmarkRequest:
    """Request parameters for an experiment run.

    Attributes:
        experiment: Experiment definition
        jobs: joblib worker count (1 runs in-process, -1 uses all cores)
    """

    experiment: ExperimentConfig
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.jobs == 0 or self.jobs < -1:
            raise ValueError(f"jobs must be positive or -1. Got: {self.jobs}")


@dataclass
class BenchmarkResponse:
    report: ExperimentReport
    runtime_seconds: float


class BenchmarkService:
    """Runs experiment grids."""

    def run(self, request: BenchmarkRequest) -> BenchmarkResponse:
        """Execute the experiment.

        Workflow:
        1. Expand the grid into cells
        2. Run all replications of a cell in parallel
        3. Pool successful replications into the cell report
        """
        experiment = request.experiment
        started = time.perf_counter()

        # Step 1: Cells
        cells = experiment.cells()
        logger.info(
            "Experiment %s: %d cells x %d replications", experiment.name, len(cells), experiment.reps
        )

        reports: list[CellReport] = []
        for index, cell in enumerate(cells, start=1):
            # Step 2: Replications
            results = Parallel(n_jobs=request.jobs)(
                delayed(run_replication)(cell, seed) for seed in experiment.seeds
            )

            # Step 3: Pool
            ok = [r.metrics for r in results if r.metrics is not None]
            errors = [(r.seed, r.error or "") for r in results if r.metrics is None]
            report = CellReport(
                cell=cell.to_dict(),
                metrics=Metrics.pooled(ok),
                errors=errors,
                max_failure_rate=experiment.max_failure_rate,
            )
            reports.append(report)
            logger.info(
                "Cell %d/%d %s: %s (%d failed)", index, len(cells), cell.label, report.status, len(errors)
            )

        report = ExperimentReport(
            name=experiment.name,
            experiment=experiment.to_dict(),
            cells=reports,
            environment=environment_metadata(),
        )
        return BenchmarkResponse(report=report, runtime_seconds=time.perf_counter() - started)


def run_experiment(experiment: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run an experiment and return its report."""
    return BenchmarkService().run(BenchmarkRequest(experiment, jobs)).report


def create_benchmark_service() -> BenchmarkService:
    """Factory function to create BenchmarkService."""
    return BenchmarkService()


def _detected_slots(
    model: GroundTruthModel,
    methods: dict[str, tuple[Method, DiscoveryConfig]],
    keys: list[SlotKey],
    T: int,
    seed: int,
) -> dict[str, list[SlotKey]]:
    data = sample(model, T, seed)
    detected: dict[str, list[SlotKey]] = {}
    for label, (method, config) in methods.items():
        graph = DiscoveryService(ParCorrAdapter(data)).discover(
            DiscoveryRequest(len(model.observed), config, method)
        ).graph
        detected[label] = [key for key in keys if graph.slot(key) is not None]
    return detected


def link_detection_rates(
    model: GroundTruthModel,
    methods: dict[str, tuple[Method, DiscoveryConfig]],
    keys: list[SlotKey],
    T: int,
    seeds: list[int],
    jobs: int = 1,
) -> dict[str, dict[SlotKey, float]]:
    """Share of replications in which each method finds an adjacency at each slot.

    The model is fixed; only the sampled data differ between seeds. Used for
    the latent confounder example, where single links matter more than class
    averages.
    """
    if not seeds:
        raise ValueError("link_detection_rates needs at least one seed")
    results = Parallel(n_jobs=jobs)(
        delayed(_detected_slots)(model, methods, keys, T, seed) for seed in seeds
    )
    return {
        label: {key: sum(key in r[label] for r in results) / len(seeds) for key in keys}
        for label in methods
    }
