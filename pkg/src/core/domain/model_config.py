"""ModelConfig Domain Object - Parameters of the random SVAR model generator.

Represents the experiment protocol's model family:
- Autocorrelations a_j drawn from [max(0, a - 0.3), a]
- L cross links with coefficients from +-[0.2, 0.8], a fraction contemporaneous
- Noise scales from [0.5, 2]
- A latent fraction of the variables hidden from the discovery methods
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any


class ModelKind(str, Enum):
    """Functional and noise variant of the generated models."""

    LINEAR = "linear"
    NONLINEAR = "nonlinear"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class ModelConfig:
    """Random model family.

    Attributes:
        n_total: Number of variables including latent ones
        n_links: Number of cross links L (None: n_total)
        autocorr: Upper end a of the autocorrelation range
        coeff_range: (low, high) magnitude range of cross coefficients
        contemp_fraction: Probability that a cross link is contemporaneous
        p_ts: Maximum lag of lagged cross links
        sigma_range: (low, high) range of noise scales
        latent_fraction: Fraction lambda of variables that are latent
        kind: Linear Gaussian, nonlinear, or discrete binomial models
        n_bin: Number of binomial trials for discrete models (even)
        nonlinear_fraction: Share of cross links using the nonlinear function
        weibull_fraction: Share of variables with Weibull noise in nonlinear models

    Invariants:
        - 0 <= latent_fraction < 1, 0 <= autocorr < 1, 0 <= contemp_fraction <= 1
        - 0 < coeff_range[0] <= coeff_range[1], 0 < sigma_range[0] <= sigma_range[1]
        - n_bin is a positive even integer for discrete models
    """

    n_total: int = 5
    n_links: int | None = None
    autocorr: float = 0.5
    coeff_range: tuple[float, float] = (0.2, 0.8)
    contemp_fraction: float = 0.3
    p_ts: int = 3
    sigma_range: tuple[float, float] = (0.5, 2.0)
    latent_fraction: float = 0.3
    kind: ModelKind = ModelKind.LINEAR
    n_bin: int = 2
    nonlinear_fraction: float = 0.5
    weibull_fraction: float = 1.0 / 3.0

    def __post_init__(self) -> None:
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        if self.n_total < 1:
            raise ValueError(f"n_total must be positive. Got: {self.n_total}")
        if self.n_links is not None and self.n_links < 0:
            raise ValueError(f"n_links must be non-negative. Got: {self.n_links}")
        if not 0.0 <= self.autocorr < 1.0:
            raise ValueError(f"autocorr must lie in [0, 1). Got: {self.autocorr}")
        if not 0.0 <= self.latent_fraction < 1.0:
            raise ValueError(f"latent_fraction must lie in [0, 1). Got: {self.latent_fraction}")
        for name in ("contemp_fraction", "nonlinear_fraction", "weibull_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]. Got: {value}")
        for name in ("coeff_range", "sigma_range"):
            low, high = getattr(self, name)
            if not 0.0 < low <= high:
                raise ValueError(f"{name} must satisfy 0 < low <= high. Got: ({low}, {high})")
        if self.p_ts < 1:
            raise ValueError(f"p_ts must be at least 1. Got: {self.p_ts}")
        if self.kind == ModelKind.DISCRETE and (self.n_bin < 2 or self.n_bin % 2):
            raise ValueError(f"n_bin must be a positive even integer. Got: {self.n_bin}")

    @property
    def links(self) -> int:
        """Number of cross links, L = n_total unless set; none without a second variable."""
        if self.n_total < 2:
            return 0
        return self.n_total if self.n_links is None else self.n_links

    @property
    def n_observed(self) -> int:
        return math.ceil((1.0 - self.latent_fraction) * self.n_total)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_total": self.n_total,
            "n_links": self.n_links,
            "autocorr": self.autocorr,
            "coeff_range": list(self.coeff_range),
            "contemp_fraction": self.contemp_fraction,
            "p_ts": self.p_ts,
            "sigma_range": list(self.sigma_range),
            "latent_fraction": self.latent_fraction,
            "kind": self.kind.value,
            "n_bin": self.n_bin,
            "nonlinear_fraction": self.nonlinear_fraction,
            "weibull_fraction": self.weibull_fraction,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelConfig:
        """Build from a (possibly partial) mapping; unknown keys raise ValueError."""
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown model config fields: {sorted(unknown)}")
        kwargs = dict(data)
        for name in ("coeff_range", "sigma_range"):
            if name in kwargs:
                kwargs[name] = tuple(float(v) for v in kwargs[name])
        if "kind" in kwargs:
            kwargs["kind"] = ModelKind(kwargs["kind"])
        return cls(**kwargs)
