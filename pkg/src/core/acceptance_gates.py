"""Acceptance Gates - Scaled correctness and performance checks with a JSON report.

Each gate is a factory returning a callable that produces a GateResult.
The runner executes registered gates in order, turns exceptions into ERROR
results and saves the combined report under the artifacts directory.

Gates:
- oracle: LPCMCI with the d-separation oracle equals the true PAG
- order: permuting variable labels permutes the output and nothing else
- confounder: detection rates on the latent confounder example
- contemporaneous: orientation recall gap on autocorrelated random models
- effect-size: default parent conditioning raises the population effect size
- majority: the plain majority rule misses a collider the modified vote finds
- tests / types / lint: the tool chain
"""

from __future__ import annotations

import json
import logging
import subprocess
import sys
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from src.adapters.filesystem_adapter import FileSystemAdapter
from src.adapters.oracle_ci_adapter import OracleCIAdapter
from src.adapters.parcorr_adapter import ParCorrAdapter
from src.adapters.relabeled_ci_adapter import RelabeledCIAdapter
from src.core.domain.discovery_config import DiscoveryConfig, Method
from src.core.domain.experiment_config import ExperimentConfig
from src.core.domain.graph import EndMark, LinkClass, NodeRef, WindowGraph
from src.core.domain.ground_truth import (
    GroundTruthModel,
    majority_counterexample_model,
    motivational_model,
)
from src.core.ports.ci_port import CITestPort
from src.core.services.benchmark_service import link_detection_rates, run_experiment
from src.core.services.covariance_service import effect_size_report
from src.core.services.discovery_service import DiscoveryRequest, DiscoveryService
from src.core.services.oracle_check_service import (
    OracleCheckRequest,
    create_oracle_check_service,
    random_check_models,
)
from src.core.services.oracle_service import true_pag
from src.core.services.simulation_service import sample

logger = logging.getLogger(__name__)

REPO_ROOT = Path(__file__).resolve().parents[2]
CONTEMPORANEOUS_EXPERIMENT = REPO_ROOT / "config" / "experiments" / "contemporaneous_orientation.yaml"
EFFECT_SIZE_TOLERANCE = 1e-8


class GateStatus(Enum):
    """Status of an acceptance gate."""

    PASS = "PASS"
    FAIL = "FAIL"
    WARN = "WARN"
    SKIP = "SKIP"
    ERROR = "ERROR"


@dataclass
class GateResult:
    """Result of a single acceptance gate."""

    name: str
    status: GateStatus
    message: str
    details: dict[str, Any] = field(default_factory=dict)
    duration_ms: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status.value,
            "message": self.message,
            "details": self.details,
            "duration_ms": self.duration_ms,
        }


@dataclass
class AcceptanceReport:
    """Complete acceptance run report."""

    timestamp: str
    overall_status: GateStatus
    gates: list[GateResult]
    summary: dict[str, int]
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "timestamp": self.timestamp,
            "overall_status": self.overall_status.value,
            "summary": self.summary,
            "gates": [g.to_dict() for g in self.gates],
            "metadata": self.metadata,
        }

    def save(self, path: str | Path) -> None:
        """Save report to JSON file."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, default=str)


GateFunction = Callable[[], GateResult]


def overall_status(summary: dict[str, int]) -> GateStatus:
    """FAIL and ERROR dominate WARN, which dominates PASS; nothing run is SKIP."""
    if summary["FAIL"] > 0 or summary["ERROR"] > 0:
        return GateStatus.FAIL
    if summary["WARN"] > 0:
        return GateStatus.WARN
    if summary["PASS"] > 0:
        return GateStatus.PASS
    return GateStatus.SKIP


class AcceptanceGateRunner:
    """Runs registered gates and collects their results."""

    def __init__(self, artifacts_dir: str | Path = "artifacts") -> None:
        self._artifacts_dir = Path(artifacts_dir)
        self._gates: list[tuple[str, GateFunction]] = []

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self._gates]

    def register(self, name: str, gate_fn: GateFunction) -> None:
        self._gates.append((name, gate_fn))

    def run_all(
        self, metadata: dict[str, Any] | None = None, only: Iterable[str] | None = None
    ) -> AcceptanceReport:
        """Run the registered gates, or the subset named in only.

        Raises:
            ValueError: If only names an unregistered gate
        """
        selected = set(only) if only is not None else None
        if selected is not None and selected - set(self.names):
            raise ValueError(
                f"Unknown gates {sorted(selected - set(self.names))}; registered: {self.names}"
            )
        results: list[GateResult] = []
        summary = {status.value: 0 for status in GateStatus}

        for name, gate_fn in self._gates:
            if selected is not None and name not in selected:
                continue
            logger.info("Running gate %s", name)
            start_time = datetime.now(timezone.utc)
            try:
                result = gate_fn()
            except Exception as e:  # noqa: BLE001
                logger.exception("Gate %s raised", name)
                result = GateResult(
                    name=name,
                    status=GateStatus.ERROR,
                    message=f"Gate execution failed: {e}",
                    details={"exception": f"{type(e).__name__}: {e}"},
                )
            result.duration_ms = (datetime.now(timezone.utc) - start_time).total_seconds() * 1000
            results.append(result)
            summary[result.status.value] += 1

        return AcceptanceReport(
            timestamp=datetime.now(timezone.utc).isoformat(),
            overall_status=overall_status(summary),
            gates=results,
            summary=summary,
            metadata=metadata or {},
        )

    def run_and_save(
        self,
        output_file: str = "acceptance_run.json",
        metadata: dict[str, Any] | None = None,
        only: Iterable[str] | None = None,
    ) -> AcceptanceReport:
        report = self.run_all(metadata, only)
        report.save(self._artifacts_dir / output_file)
        return report


def _verdict(name: str, ok: bool, message: str, details: dict[str, Any]) -> GateResult:
    return GateResult(
        name=name,
        status=GateStatus.PASS if ok else GateStatus.FAIL,
        message=message,
        details=details,
    )


# =============================================================================
# Correctness gates
# =============================================================================


def create_oracle_gate(
    n_models: int = 200, seed: int = 0, ks: tuple[int, ...] = (0, 2), tau_max: int = 2
) -> GateFunction:
    """LPCMCI on the oracle must reproduce the true PAG of every random model."""

    def run() -> GateResult:
        models = tuple(random_check_models(n_models, seed))
        service = create_oracle_check_service()
        details: dict[str, Any] = {"n_models": n_models, "seed": seed, "tau_max": tau_max}
        passed = True
        for k in ks:
            response = service.check(OracleCheckRequest(models=models, tau_max=tau_max, k=k))
            failing = [c.index for c in response.checks if not c.passed]
            details[f"k={k}"] = {"passed": response.n_passed, "failing_models": failing[:20]}
            passed = passed and response.all_passed
        return _verdict(
            "Oracle PAG",
            passed,
            f"{len(models)} models x k in {list(ks)}: " + ("all equal" if passed else "mismatches"),
            details,
        )

    return run


def order_violations(
    ci: CITestPort, n_vars: int, config: DiscoveryConfig, perms: Iterable[list[int]]
) -> list[str]:
    """Diff lines for every permutation whose output is not the permuted output."""
    base = DiscoveryService(ci).discover(DiscoveryRequest(n_vars, config)).graph
    violations: list[str] = []
    for perm in perms:
        relabeled = DiscoveryService(RelabeledCIAdapter(ci, perm)).discover(
            DiscoveryRequest(n_vars, config)
        ).graph
        expected = base.permute(perm)
        if relabeled != expected:
            violations.extend(f"perm={perm}: {line}" for line in relabeled.diff(expected))
    return violations


def create_order_gate(
    n_models: int = 20,
    n_perms: int = 50,
    seed: int = 0,
    T: int = 500,
    config: DiscoveryConfig | None = None,
) -> GateFunction:
    """Permuted inputs give permuted outputs, for the oracle and for ParCorr on fixed data."""
    cfg = config or DiscoveryConfig(alpha=0.01, tau_max=2, k=1)

    def run() -> GateResult:
        rng = np.random.default_rng(seed)
        models = random_check_models(n_models, seed)
        perms: list[list[list[int]]] = [[] for _ in models]
        for index in range(n_perms):
            slot = index % len(models)
            perms[slot].append([int(v) for v in rng.permutation(len(models[slot].observed))])

        violations: list[str] = []
        for index, model in enumerate(models):
            if not perms[index]:
                continue
            n_vars = len(model.observed)
            for name, ci in (
                ("oracle", OracleCIAdapter.from_truth(model, cfg.tau_max)),
                ("parcorr", ParCorrAdapter(sample(model, T, seed + index))),
            ):
                violations.extend(
                    f"model {index} {name} {line}"
                    for line in order_violations(ci, n_vars, cfg, perms[index])
                )
        return _verdict(
            "Order independence",
            not violations,
            f"{n_perms} permutations on {n_models} models, {len(violations)} differing slots",
            {"violations": violations[:50]},
        )

    return run


def create_confounder_gate(
    reps: int = 200, seed: int = 0, T: int = 500, alpha: float = 0.01, jobs: int = 1
) -> GateFunction:
    """Latent confounder example: LPCMCI finds X_t - Y_t, SVAR-FCI mostly does not."""
    xy, y2z = (0, 0, 1), (1, 2, 2)
    methods = {
        "lpcmci": (Method.LPCMCI, DiscoveryConfig(alpha=alpha, tau_max=2, k=4)),
        "svarfci": (Method.SVARFCI, DiscoveryConfig(alpha=alpha, tau_max=2)),
    }

    def run() -> GateResult:
        rates = link_detection_rates(
            motivational_model(), methods, [xy, y2z], T, list(range(seed, seed + reps)), jobs
        )
        lp, sv = rates["lpcmci"], rates["svarfci"]
        checks = {
            "lpcmci_detects_xy": lp[xy] >= 0.6,
            "svarfci_misses_xy": sv[xy] <= 0.4,
            "svarfci_more_false_y2z": sv[y2z] > lp[y2z],
        }
        return _verdict(
            "Latent confounder example",
            all(checks.values()),
            f"X-Y detected: lpcmci {lp[xy]:.2f}, svarfci {sv[xy]:.2f}; "
            f"false Y(t-2)-Z: lpcmci {lp[y2z]:.2f}, svarfci {sv[y2z]:.2f}",
            {
                "reps": reps,
                "checks": checks,
                "rates": {m: {str(k): v for k, v in r.items()} for m, r in rates.items()},
            },
        )

    return run


def create_contemporaneous_gate(
    reps: int = 100,
    seed: int = 0,
    jobs: int = 1,
    min_gap: float = 0.25,
    experiment_path: str | Path = CONTEMPORANEOUS_EXPERIMENT,
) -> GateFunction:
    """LPCMCI's contemporaneous edgemark recall beats SVAR-FCI's at strong autocorrelation."""

    def run() -> GateResult:
        data = FileSystemAdapter().load_config(experiment_path)
        experiment = replace(ExperimentConfig.from_dict(data), reps=reps, seed_base=seed)
        report = run_experiment(experiment, jobs)
        by_method = {cell.cell["method"]: cell for cell in report.cells}
        lp, sv = by_method[Method.LPCMCI.value], by_method[Method.SVARFCI.value]
        lp_recall = lp.metrics.classes[LinkClass.CONTEMPORANEOUS].edgemark_recall
        sv_recall = sv.metrics.classes[LinkClass.CONTEMPORANEOUS].edgemark_recall
        lagged_fpr = lp.metrics.classes[LinkClass.LAGGED].fpr
        alpha = float(lp.cell["alpha"])
        checks = {
            "recall_gap": lp_recall - sv_recall >= min_gap,
            "lagged_fpr": lagged_fpr <= 2.5 * alpha,
            "cells_ok": not report.failed_cells,
        }
        return _verdict(
            "Contemporaneous orientation",
            all(checks.values()),
            f"contemporaneous edgemark recall lpcmci {lp_recall:.2f} vs svarfci {sv_recall:.2f}; "
            f"lagged FPR {lagged_fpr:.3f}",
            {"reps": reps, "checks": checks, "report": report.to_dict()},
        )

    return run


def observed_parents(model: GroundTruthModel, node: NodeRef) -> set[NodeRef]:
    """Observed parents of an observed node, in observed indices."""
    observed = sorted(model.observed)
    var = observed[node.var]
    return {
        NodeRef(observed.index(link.i), node.lag + link.tau)
        for link in model.links_into(var)
        if link.i in observed
    }


def _with_and_without_defaults(
    model: GroundTruthModel, x: NodeRef, y: NodeRef
) -> tuple[float, float]:
    defaults = (observed_parents(model, x) | observed_parents(model, y)) - {x, y}
    ordered = sorted(defaults, key=lambda n: (n.lag, n.var))
    without = [
        frozenset(n for bit, n in enumerate(ordered) if mask >> bit & 1)
        for mask in range(2 ** len(ordered))
    ]
    plain = effect_size_report(model, (x, y), without)
    lifted = effect_size_report(model, (x, y), [s | frozenset(defaults) for s in without])
    return lifted.minimum, plain.minimum


def create_effect_size_gate() -> GateFunction:
    """Parent defaults raise the minimum population |parcorr| on the confounder example."""

    def run() -> GateResult:
        model = motivational_model()
        pairs = {
            "X(t)-Y(t)": (NodeRef(0, 0), NodeRef(1, 0)),
            "Y(t-1)-Z(t)": (NodeRef(1, 1), NodeRef(2, 0)),
        }
        details: dict[str, Any] = {}
        ok = True
        for label, (x, y) in pairs.items():
            with_defaults, without = _with_and_without_defaults(model, x, y)
            details[label] = {"with_defaults": with_defaults, "without_defaults": without}
            ok = ok and with_defaults - without > EFFECT_SIZE_TOLERANCE
        return _verdict(
            "Effect size",
            ok,
            "default conditioning raises the effect size" if ok else "no strict increase",
            details,
        )

    return run


def majority_regression_graphs() -> dict[str, WindowGraph]:
    """Outputs on the majority-rule counterexample, with the true PAG under "truth"."""
    model = majority_counterexample_model()
    oracle = OracleCIAdapter.from_truth(model, 0)
    n_vars = len(model.observed)
    graphs = {"truth": true_pag(model.graph, 0)}
    for label, method, rule in (
        ("svarfci_standard", Method.SVARFCI, "standard"),
        ("svarfci_majority", Method.SVARFCI, "majority"),
        ("lpcmci", Method.LPCMCI, "majority"),
    ):
        config = DiscoveryConfig(
            tau_max=0, max_cond_ancestral=None, max_cond_nonancestral=None, sepset_rule=rule
        )
        graphs[label] = DiscoveryService(oracle).discover(
            DiscoveryRequest(n_vars, config, method)
        ).graph
    return graphs


def heads_at_collider(graph: WindowGraph) -> bool:
    d, e, f = NodeRef(3, 0), NodeRef(4, 0), NodeRef(5, 0)
    return graph.mark(f, d) == EndMark.HEAD and graph.mark(f, e) == EndMark.HEAD


def create_majority_gate() -> GateFunction:
    """The plain majority rule loses the collider at F; the recorded-set readings keep it."""

    def run() -> GateResult:
        graphs = majority_regression_graphs()
        truth = graphs["truth"]
        checks = {
            "truth_has_collider": heads_at_collider(truth),
            "standard_equals_truth": graphs["svarfci_standard"] == truth,
            "majority_misses_collider": not heads_at_collider(graphs["svarfci_majority"]),
            "lpcmci_equals_truth": graphs["lpcmci"] == truth,
        }
        return _verdict(
            "Majority rule regression",
            all(checks.values()),
            ", ".join(f"{k}={v}" for k, v in checks.items()),
            {"checks": checks, "graphs": {k: g.to_dict() for k, g in graphs.items()}},
        )

    return run


# =============================================================================
# Tool chain gates
# =============================================================================


def _run_module(module: str, args: list[str], timeout: int) -> subprocess.CompletedProcess[str]:
    return subprocess.run(
        [sys.executable, "-m", module, *args], capture_output=True, text=True, timeout=timeout
    )


def _missing_tool(name: str, result: subprocess.CompletedProcess[str]) -> GateResult | None:
    if "No module named" in result.stderr:
        return GateResult(name=name, status=GateStatus.SKIP, message=result.stderr.strip()[-200:])
    return None


def create_test_gate(
    test_path: str = "tests/", min_coverage: float = 80.0, include_slow: bool = False
) -> GateFunction:
    """pytest with coverage; below min_coverage is a WARN."""

    def run() -> GateResult:
        coverage_file = Path("artifacts/coverage.json")
        args = [test_path, "-q", "--tb=short", "--cov=src", f"--cov-report=json:{coverage_file}"]
        if not include_slow:
            args += ["-m", "not slow"]
        try:
            result = _run_module("pytest", args, timeout=1800)
        except subprocess.TimeoutExpired:
            return GateResult(name="Tests", status=GateStatus.ERROR, message="Tests timed out")
        skipped = _missing_tool("Tests", result)
        if skipped:
            return skipped
        coverage_pct = 0.0
        if coverage_file.exists():
            with open(coverage_file, encoding="utf-8") as f:
                coverage_pct = json.load(f).get("totals", {}).get("percent_covered", 0.0)
        details = {"coverage_pct": coverage_pct, "min_coverage": min_coverage}
        if result.returncode != 0:
            details["stdout"] = result.stdout[-2000:]
            return GateResult(
                name="Tests", status=GateStatus.FAIL, message="Some tests failed", details=details
            )
        if coverage_pct < min_coverage:
            return GateResult(
                name="Tests",
                status=GateStatus.WARN,
                message=f"Tests passed but coverage {coverage_pct:.1f}% < {min_coverage}%",
                details=details,
            )
        return GateResult(
            name="Tests",
            status=GateStatus.PASS,
            message=f"All tests passed, coverage {coverage_pct:.1f}%",
            details=details,
        )

    return run


def create_type_check_gate() -> GateFunction:
    def run() -> GateResult:
        result = _run_module("mypy", ["src/"], timeout=300)
        skipped = _missing_tool("Type checking", result)
        if skipped:
            return skipped
        errors = [line for line in result.stdout.splitlines() if ": error:" in line]
        return _verdict(
            "Type checking",
            result.returncode == 0,
            f"{len(errors)} type errors",
            {"errors": errors[:20]},
        )

    return run


def create_lint_gate() -> GateFunction:
    def run() -> GateResult:
        result = _run_module("ruff", ["check", "src/", "--output-format=json"], timeout=120)
        skipped = _missing_tool("Linting", result)
        if skipped:
            return skipped
        if result.returncode == 0:
            return GateResult(name="Linting", status=GateStatus.PASS, message="No lint issues")
        try:
            issues = json.loads(result.stdout) if result.stdout else []
        except json.JSONDecodeError:
            issues = []
        return GateResult(
            name="Linting",
            status=GateStatus.WARN,
            message=f"Found {len(issues)} lint issues",
            details={"issues": issues[:20]},
        )

    return run


def create_default_runner(
    full: bool = False, seed: int = 0, jobs: int = 1, artifacts_dir: str | Path = "artifacts"
) -> AcceptanceGateRunner:
    """Runner with every gate; full=True uses the acceptance sizes instead of quick ones."""
    runner = AcceptanceGateRunner(artifacts_dir)
    runner.register("oracle", create_oracle_gate(n_models=200 if full else 30, seed=seed))
    runner.register(
        "order",
        create_order_gate(n_models=20 if full else 4, n_perms=50 if full else 8, seed=seed),
    )
    runner.register("effect-size", create_effect_size_gate())
    runner.register("majority", create_majority_gate())
    runner.register(
        "confounder", create_confounder_gate(reps=200 if full else 40, seed=seed, jobs=jobs)
    )
    runner.register(
        "contemporaneous",
        create_contemporaneous_gate(reps=100 if full else 20, seed=seed, jobs=jobs),
    )
    runner.register("tests", create_test_gate(include_slow=full))
    runner.register("types", create_type_check_gate())
    runner.register("lint", create_lint_gate())
    return runner
