"""ExperimentConfig Domain Object - A grid of benchmark cells.

Represents one experiment definition:
- Methods, CI tests, alpha, tau_max, k and T, each a single value or a list
- A model family whose fields may also be lists
- Replication count and seed base shared by all cells

The Cartesian product of all listed values forms the cells. Every cell uses
the seeds seed_base .. seed_base + reps - 1, so methods see the same models.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields
from typing import Any

from src.core.domain.discovery_config import DiscoveryConfig, Method
from src.core.domain.model_config import ModelConfig

CI_TESTS = ("parcorr", "gtest", "oracle")
RANGE_FIELDS = ("coeff_range", "sigma_range")
LPCMCI_METHODS = (Method.LPCMCI, Method.LPCMCI_ANCESTRAL)


def _as_tuple(value: Any) -> tuple[Any, ...]:
    return tuple(value) if isinstance(value, (list, tuple)) else (value,)


def _model_grid_values(name: str, value: Any) -> tuple[Any, ...]:
    # A range is a pair; a grid of ranges is a list of pairs
    if name in RANGE_FIELDS:
        if isinstance(value, (list, tuple)) and value and isinstance(value[0], (list, tuple)):
            return tuple(tuple(v) for v in value)
        return (tuple(value),)
    return _as_tuple(value)


@dataclass(frozen=True)
class ExperimentCell:
    """One point of the experiment grid."""

    method: Method
    k: int
    ci: str
    alpha: float
    tau_max: int
    T: int
    model: ModelConfig
    discovery_overrides: dict[str, Any] = field(default_factory=dict)

    def discovery_config(self) -> DiscoveryConfig:
        return DiscoveryConfig.from_dict(
            {**self.discovery_overrides, "alpha": self.alpha, "tau_max": self.tau_max, "k": self.k}
        )

    @property
    def label(self) -> str:
        method = (
            f"{self.method.value}(k={self.k})"
            if self.method in LPCMCI_METHODS
            else self.method.value
        )
        return f"{method} {self.ci} alpha={self.alpha:g} tau_max={self.tau_max} T={self.T}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "k": self.k,
            "ci": self.ci,
            "alpha": self.alpha,
            "tau_max": self.tau_max,
            "T": self.T,
            "model": self.model.to_dict(),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment definition.

    Attributes:
        name: Report name
        method: Discovery methods
        k: Preliminary iterations (LPCMCI only)
        ci: CI tests ("parcorr", "gtest", "oracle")
        alpha: Significance levels
        tau_max: Analysis windows
        T: Time series lengths
        model: ModelConfig field values, scalars or lists
        reps: Replications per cell
        seed_base: First replication seed
        discovery: Extra DiscoveryConfig fields for all cells
        max_failure_rate: Share of failed replications above which a cell fails

    Invariants:
        - Every listed value is valid for its field
        - reps >= 1, 0 <= max_failure_rate <= 1
    """

    name: str = "experiment"
    method: tuple[Method, ...] = (Method.LPCMCI,)
    k: tuple[int, ...] = (0,)
    ci: tuple[str, ...] = ("parcorr",)
    alpha: tuple[float, ...] = (0.01,)
    tau_max: tuple[int, ...] = (1,)
    T: tuple[int, ...] = (500,)
    model: dict[str, tuple[Any, ...]] = field(default_factory=dict)
    reps: int = 10
    seed_base: int = 0
    discovery: dict[str, Any] = field(default_factory=dict)
    max_failure_rate: float = 0.1

    def __post_init__(self) -> None:
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        if self.reps < 1:
            raise ValueError(f"reps must be positive. Got: {self.reps}")
        if not 0.0 <= self.max_failure_rate <= 1.0:
            raise ValueError(f"max_failure_rate must lie in [0, 1]. Got: {self.max_failure_rate}")
        for name in ("method", "k", "ci", "alpha", "tau_max", "T"):
            if not getattr(self, name):
                raise ValueError(f"{name} needs at least one value")
        unknown = set(self.ci) - set(CI_TESTS)
        if unknown:
            raise ValueError(f"Unknown CI tests {sorted(unknown)}; expected one of {CI_TESTS}")
        if any(t < 1 for t in self.T):
            raise ValueError(f"T values must be positive. Got: {self.T}")
        model_fields = {f.name for f in fields(ModelConfig)}
        unknown = set(self.model) - model_fields
        if unknown:
            raise ValueError(f"Unknown model config fields: {sorted(unknown)}")
        # Builds every cell once so invalid combinations fail here
        self.cells()

    def model_configs(self) -> list[ModelConfig]:
        names = sorted(self.model)
        return [
            ModelConfig.from_dict(dict(zip(names, combo, strict=True)))
            for combo in itertools.product(*(self.model[name] for name in names))
        ]

    def cells(self) -> list[ExperimentCell]:
        """Grid cells; k is fixed at 0 for methods without preliminary iterations."""
        cells: list[ExperimentCell] = []
        seen: set[tuple[Any, ...]] = set()
        for model_config in self.model_configs():
            for method, k, ci, alpha, tau_max, T in itertools.product(
                self.method, self.k, self.ci, self.alpha, self.tau_max, self.T
            ):
                if method not in LPCMCI_METHODS:
                    k = 0
                model_key = tuple(sorted((n, str(v)) for n, v in model_config.to_dict().items()))
                key = (method, k, ci, alpha, tau_max, T, model_key)
                if key in seen:
                    continue
                seen.add(key)
                cell = ExperimentCell(
                    method, k, ci, alpha, tau_max, T, model_config, dict(self.discovery)
                )
                cell.discovery_config()
                cells.append(cell)
        return cells

    @property
    def seeds(self) -> list[int]:
        return list(range(self.seed_base, self.seed_base + self.reps))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "method": [m.value for m in self.method],
            "k": list(self.k),
            "ci": list(self.ci),
            "alpha": list(self.alpha),
            "tau_max": list(self.tau_max),
            "T": list(self.T),
            "model": {
                name: [list(v) if isinstance(v, tuple) else v for v in values]
                for name, values in self.model.items()
            },
            "reps": self.reps,
            "seed_base": self.seed_base,
            "discovery": dict(self.discovery),
            "max_failure_rate": self.max_failure_rate,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Parse the experiment JSON/YAML format; scalars and lists are both accepted.

        Raises:
            ValueError: On unknown keys or invalid values
        """
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown experiment fields: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        if "name" in data:
            kwargs["name"] = str(data["name"])
        if "method" in data:
            kwargs["method"] = tuple(Method(m) for m in _as_tuple(data["method"]))
        for name, cast in (("k", int), ("alpha", float), ("tau_max", int), ("T", int)):
            if name in data:
                kwargs[name] = tuple(cast(v) for v in _as_tuple(data[name]))
        if "ci" in data:
            kwargs["ci"] = tuple(str(v) for v in _as_tuple(data["ci"]))
        if "model" in data:
            kwargs["model"] = {
                name: _model_grid_values(name, value) for name, value in dict(data["model"]).items()
            }
        for name, cast in (("reps", int), ("seed_base", int), ("max_failure_rate", float)):
            if name in data:
                kwargs[name] = cast(data[name])
        if "discovery" in data:
            kwargs["discovery"] = dict(data["discovery"])
        return cls(**kwargs)
