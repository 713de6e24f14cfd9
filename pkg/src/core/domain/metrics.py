"""Metrics Domain Object - Graph comparison scores with their counts.

Represents the scores of estimated graphs against true PAGs:
- Adjacency true and false positive rates per link class
- Edgemark recall and precision per link class
- Effect size, conditioning cardinality, runtime and test counts per run

Rates are always derived from pooled counts, so combining metrics of several
replications does not depend on their order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.core.domain.graph import LinkClass

COUNT_FIELDS = (
    "true_adjacent",
    "detected",
    "true_absent",
    "false_adjacent",
    "true_marks",
    "recalled_marks",
    "estimated_marks",
    "correct_marks",
)

TRUE_LINK_TYPES = ("directed", "bidirected", "unoriented")


def ratio(numerator: int, denominator: int, vacuous: float) -> float:
    """numerator / denominator, or the vacuous value when nothing was counted."""
    return numerator / denominator if denominator else vacuous


@dataclass(frozen=True)
class ClassCounts:
    """Counts behind the scores of one link class.

    Attributes:
        true_adjacent: Canonical pairs adjacent in the truth
        detected: Of those, adjacent in the estimate
        true_absent: Canonical pairs not adjacent in the truth
        false_adjacent: Of those, adjacent in the estimate
        true_marks: Non-circle end marks of the truth
        recalled_marks: Of those, reproduced exactly by the estimate
        estimated_marks: Non-circle end marks of the estimate (conflicts included)
        correct_marks: Of those, equal to the truth's mark

    Invariants:
        - All counts are non-negative
        - Each hit count is bounded by its total
    """

    true_adjacent: int = 0
    detected: int = 0
    true_absent: int = 0
    false_adjacent: int = 0
    true_marks: int = 0
    recalled_marks: int = 0
    estimated_marks: int = 0
    correct_marks: int = 0

    def __post_init__(self) -> None:
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        for name in COUNT_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative. Got: {getattr(self, name)}")
        for hits, total in (
            ("detected", "true_adjacent"),
            ("false_adjacent", "true_absent"),
            ("recalled_marks", "true_marks"),
            ("correct_marks", "estimated_marks"),
        ):
            if getattr(self, hits) > getattr(self, total):
                raise ValueError(
                    f"{hits} ({getattr(self, hits)}) exceeds {total} ({getattr(self, total)})"
                )

    def __add__(self, other: ClassCounts) -> ClassCounts:
        return ClassCounts(**{name: getattr(self, name) + getattr(other, name) for name in COUNT_FIELDS})

    @property
    def tpr(self) -> float:
        return ratio(self.detected, self.true_adjacent, 1.0)

    @property
    def fpr(self) -> float:
        return ratio(self.false_adjacent, self.true_absent, 0.0)

    @property
    def edgemark_recall(self) -> float:
        return ratio(self.recalled_marks, self.true_marks, 1.0)

    @property
    def edgemark_precision(self) -> float:
        return ratio(self.correct_marks, self.estimated_marks, 1.0)

    @property
    def zero_counts(self) -> list[str]:
        """Scores whose denominator is zero and which carry the vacuous value."""
        flags = []
        for score, total in (
            ("tpr", self.true_adjacent),
            ("fpr", self.true_absent),
            ("edgemark_recall", self.true_marks),
            ("edgemark_precision", self.estimated_marks),
        ):
            if total == 0:
                flags.append(score)
        return flags

    def to_dict(self) -> dict[str, Any]:
        return {
            "counts": {name: getattr(self, name) for name in COUNT_FIELDS},
            "tpr": self.tpr,
            "fpr": self.fpr,
            "edgemark_recall": self.edgemark_recall,
            "edgemark_precision": self.edgemark_precision,
            "zero_counts": self.zero_counts,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ClassCounts:
        return cls(**{name: int(data["counts"][name]) for name in COUNT_FIELDS})


def _empty_classes() -> dict[LinkClass, ClassCounts]:
    return {cls: ClassCounts() for cls in LinkClass}


@dataclass
class Metrics:
    """Scores of one or more estimated graphs.

    Attributes:
        classes: Counts per link class
        runtimes: Wall time per run in seconds
        n_tests: Number of CI tests per run
        max_cardinalities: Largest conditioning set per run
        effect_sizes: Mean minimum |statistic| over true links per run (when recorded)
        true_link_types: Directed, bidirected and unoriented true links
        n_runs: Number of scored runs

    Invariants:
        - Every link class has counts
        - Per-run lists have at most n_runs entries
    """

    classes: dict[LinkClass, ClassCounts] = field(default_factory=_empty_classes)
    runtimes: list[float] = field(default_factory=list)
    n_tests: list[int] = field(default_factory=list)
    max_cardinalities: list[int] = field(default_factory=list)
    effect_sizes: list[float] = field(default_factory=list)
    true_link_types: dict[str, int] = field(
        default_factory=lambda: {name: 0 for name in TRUE_LINK_TYPES}
    )
    n_runs: int = 1

    def __post_init__(self) -> None:
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        missing = set(LinkClass) - set(self.classes)
        if missing:
            raise ValueError(f"Metrics lack link classes: {sorted(c.value for c in missing)}")
        for name in ("runtimes", "n_tests", "max_cardinalities", "effect_sizes"):
            if len(getattr(self, name)) > self.n_runs:
                raise ValueError(f"{name} has more entries than n_runs={self.n_runs}")
        if set(self.true_link_types) != set(TRUE_LINK_TYPES):
            raise ValueError(f"true_link_types must have keys {TRUE_LINK_TYPES}")

    def combine(self, other: Metrics) -> Metrics:
        """Pool two sets of metrics."""
        return Metrics(
            classes={cls: self.classes[cls] + other.classes[cls] for cls in LinkClass},
            runtimes=self.runtimes + other.runtimes,
            n_tests=self.n_tests + other.n_tests,
            max_cardinalities=self.max_cardinalities + other.max_cardinalities,
            effect_sizes=self.effect_sizes + other.effect_sizes,
            true_link_types={
                name: self.true_link_types[name] + other.true_link_types[name]
                for name in TRUE_LINK_TYPES
            },
            n_runs=self.n_runs + other.n_runs,
        )

    @classmethod
    def pooled(cls, runs: list[Metrics]) -> Metrics:
        """Pool any number of runs; an empty list gives zero runs."""
        result = cls(n_runs=0)
        for run in runs:
            result = result.combine(run)
        return result

    @property
    def true_link_fractions(self) -> dict[str, float]:
        total = sum(self.true_link_types.values())
        return {name: ratio(count, total, 0.0) for name, count in self.true_link_types.items()}

    def runtime_summary(self) -> dict[str, float | None]:
        """Mean and 90% range (5th to 95th percentile) of the runtimes."""
        if not self.runtimes:
            return {"mean": None, "low": None, "high": None}
        values = np.asarray(self.runtimes)
        low, high = np.percentile(values, [5, 95])
        return {"mean": float(values.mean()), "low": float(low), "high": float(high)}

    @staticmethod
    def _mean(values: list[float] | list[int]) -> float | None:
        return float(np.mean(values)) if values else None

    def to_dict(self) -> dict[str, Any]:
        """Convert to the report schema; runtimes are kept under a separate timing key."""
        return {
            "n_runs": self.n_runs,
            "classes": {cls.value: self.classes[cls].to_dict() for cls in LinkClass},
            "mean_effect_size": self._mean(self.effect_sizes),
            "mean_max_cardinality": self._mean(self.max_cardinalities),
            "mean_n_tests": self._mean(self.n_tests),
            "true_link_types": dict(self.true_link_types),
            "true_link_fractions": self.true_link_fractions,
            "effect_sizes": list(self.effect_sizes),
            "max_cardinalities": list(self.max_cardinalities),
            "n_tests": list(self.n_tests),
            "timing": {"runtimes": list(self.runtimes), **self.runtime_summary()},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Metrics:
        return cls(
            classes={
                LinkClass(name): ClassCounts.from_dict(record)
                for name, record in data["classes"].items()
            },
            runtimes=[float(v) for v in data.get("timing", {}).get("runtimes", [])],
            n_tests=[int(v) for v in data.get("n_tests", [])],
            max_cardinalities=[int(v) for v in data.get("max_cardinalities", [])],
            effect_sizes=[float(v) for v in data.get("effect_sizes", [])],
            true_link_types={name: int(v) for name, v in data["true_link_types"].items()},
            n_runs=int(data["n_runs"]),
        )
