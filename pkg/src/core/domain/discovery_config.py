"""DiscoveryConfig Domain Object - Parameters of a causal discovery run.

Holds the significance level, lag window, number of preliminary
iterations, conditioning-set caps and the orientation rule lists.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any


class RuleId(str, Enum):
    """Orientation rules known to the orientation phase."""

    ER0A = "ER0a"
    ER0B = "ER0b"
    ER0C = "ER0c"
    ER0D = "ER0d"
    ER1 = "ER1"
    ER2 = "ER2"
    ER3 = "ER3"
    ER4 = "ER4"
    R4 = "R4"
    ER8 = "ER8"
    ER9 = "ER9"
    ER10 = "ER10"
    APR = "APR"
    MMR = "MMR"


class Method(str, Enum):
    """Discovery methods available to the CLI and the benchmark."""

    LPCMCI = "lpcmci"
    LPCMCI_ANCESTRAL = "lpcmci_ancestral"
    SVARFCI = "svarfci"
    SVARRFCI = "svarrfci"


LAGGED_RULES: tuple[RuleId, ...] = (
    RuleId.APR,
    RuleId.MMR,
    RuleId.ER8,
    RuleId.ER2,
    RuleId.ER1,
    RuleId.ER9,
    RuleId.ER10,
)

FULL_RULES: tuple[RuleId, ...] = (
    RuleId.APR,
    RuleId.MMR,
    RuleId.ER8,
    RuleId.ER2,
    RuleId.ER1,
    RuleId.ER0D,
    RuleId.ER0C,
    RuleId.ER3,
    RuleId.R4,
    RuleId.ER9,
    RuleId.ER10,
    RuleId.ER0B,
    RuleId.ER0A,
)

SEPSET_RULES = ("standard", "majority")


@dataclass(frozen=True)
class DiscoveryConfig:
    """Configuration for LPCMCI and the SVAR-FCI baselines.

    Attributes:
        alpha: Significance level; p > alpha means independent
        tau_max: Maximum lag of the analysis window
        k: Number of preliminary ancestral iterations with parent carry-over
        max_cond_ancestral: Cap on |S| in the ancestral phase (None: unlimited)
        max_cond_nonancestral: Cap on |S| in the non-ancestral phase (None: unlimited)
        run_nonancestral: False stops after the final ancestral phase
        lagged_rules: Rules applied after removals in the ancestral phase
        final_rules: Rules applied at the end of each phase
        max_vote_cardinality: Cap on subset size in separating-set votes
        sepset_rule: Collider rule of the SVAR-FCI baselines

    Invariants:
        - 0 < alpha < 1
        - tau_max >= 0, k >= 0
        - caps are None or >= 0
    """

    alpha: float = 0.01
    tau_max: int = 1
    k: int = 0
    max_cond_ancestral: int | None = None
    max_cond_nonancestral: int | None = 3
    run_nonancestral: bool = True
    lagged_rules: tuple[RuleId, ...] = LAGGED_RULES
    final_rules: tuple[RuleId, ...] = FULL_RULES
    max_vote_cardinality: int | None = None
    sepset_rule: str = "majority"

    def __post_init__(self) -> None:
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1). Got: {self.alpha}")
        if self.tau_max < 0:
            raise ValueError(f"tau_max must be non-negative. Got: {self.tau_max}")
        if self.k < 0:
            raise ValueError(f"k must be non-negative. Got: {self.k}")
        for name in ("max_cond_ancestral", "max_cond_nonancestral", "max_vote_cardinality"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be None or non-negative. Got: {value}")
        if self.sepset_rule not in SEPSET_RULES:
            raise ValueError(f"sepset_rule must be one of {SEPSET_RULES}. Got: {self.sepset_rule}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "tau_max": self.tau_max,
            "k": self.k,
            "max_cond_ancestral": self.max_cond_ancestral,
            "max_cond_nonancestral": self.max_cond_nonancestral,
            "run_nonancestral": self.run_nonancestral,
            "lagged_rules": [r.value for r in self.lagged_rules],
            "final_rules": [r.value for r in self.final_rules],
            "max_vote_cardinality": self.max_vote_cardinality,
            "sepset_rule": self.sepset_rule,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DiscoveryConfig:
        """Build from a (possibly partial) mapping, e.g. the YAML defaults."""
        kwargs: dict[str, Any] = {}
        for name in (
            "alpha",
            "tau_max",
            "k",
            "max_cond_ancestral",
            "max_cond_nonancestral",
            "run_nonancestral",
            "max_vote_cardinality",
            "sepset_rule",
        ):
            if name in data:
                kwargs[name] = data[name]
        for name in ("lagged_rules", "final_rules"):
            if name in data:
                kwargs[name] = tuple(RuleId(r) for r in data[name])
        return cls(**kwargs)
