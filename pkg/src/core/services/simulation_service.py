"""SimulationService - Random SVAR models and their time series.

This service provides:
1. Random model generation for the experiment protocol (linear Gaussian,
   nonlinear with Weibull noise, discrete binomial variants)
2. Stationarity screening with a bounded redraw budget
3. Sampling with burn-in from a zero initial state, returning only the
   observed columns

All randomness flows from numpy's PCG64 generator (np.random.default_rng),
whose streams are bit-identical across platforms for a given seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy import special

from src.core.domain.ground_truth import (
    GroundTruthModel,
    Link,
    LinkFunction,
    NoiseDist,
    NoiseSpec,
)
from src.core.domain.model_config import ModelConfig, ModelKind
from src.core.services.covariance_service import spectral_radius

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 1000
WARN_ATTEMPTS = 100
SCREEN_STEPS = 500
EXPLOSION_THRESHOLD = 1e4
MIN_BURN_IN = 200
MAX_BURN_IN = 20_000
# Fraction of the zero initial state left in a linear trajectory after burn-in
BURN_IN_DECAY = 1e-3

# Mean and standard deviation of a Weibull variable with shape 2 and unit scale
_WEIBULL_MEAN = float(special.gamma(1.5))
_WEIBULL_STD = float(np.sqrt(1.0 - special.gamma(1.5) ** 2))


class StationarityRejectionError(RuntimeError):
    """Raised when no stationary model was drawn within the redraw budget."""

    def __init__(self, attempts: int, last_reason: str) -> None:
        self.attempts = attempts
        self.last_reason = last_reason
        super().__init__(
            f"No stationary model after {attempts} draws; last rejection: {last_reason}"
        )


class ExplosiveTrajectoryError(RuntimeError):
    """Raised when a simulated value leaves the explosion threshold."""

    def __init__(self, step: int, var: int, value: float) -> None:
        self.step = step
        self.var = var
        self.value = value
        super().__init__(
            f"Trajectory exploded at step {step}, variable {var}: |{value:.3g}| > {EXPLOSION_THRESHOLD:g}"
        )


def nonlin_f1(x: float) -> float:
    """f(x) = (1 + 5 x exp(-x^2 / 20)) x."""
    return float((1.0 + 5.0 * x * np.exp(-x * x / 20.0)) * x)


def burn_in(p_ts: int, radius: float | None = None) -> int:
    """Steps discarded before sampling.

    Given the spectral radius of a linear model, slowly mixing dynamics get a
    longer burn-in, up to MAX_BURN_IN.
    """
    steps = max(MIN_BURN_IN, 20 * p_ts)
    if radius is not None and 0.0 < radius < 1.0:
        settle = int(np.ceil(np.log(BURN_IN_DECAY) / np.log(radius)))
        steps = max(steps, min(settle, MAX_BURN_IN))
    return steps


# =============================================================================
# Model generation
# =============================================================================


def _draw_cross_links(cfg: ModelConfig, rng: np.random.Generator) -> list[Link]:
    n = cfg.n_total
    capacity = n * (n - 1) * cfg.p_ts + n * (n - 1) // 2
    if cfg.links > capacity:
        raise ValueError(f"n_links={cfg.links} exceeds the {capacity} possible cross links")

    # Contemporaneous links point from lower to higher rank of a hidden permutation
    rank = np.argsort(rng.permutation(n))
    links: dict[tuple[int, int, int], Link] = {}
    while len(links) < cfg.links:
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        tau = 0 if rng.random() < cfg.contemp_fraction else int(rng.integers(1, cfg.p_ts + 1))
        if tau == 0 and rank[i] > rank[j]:
            i, j = j, i
        low, high = cfg.coeff_range
        coeff = float(rng.uniform(low, high)) * float(rng.choice([-1.0, 1.0]))
        func = LinkFunction.LINEAR
        if cfg.kind == ModelKind.NONLINEAR and rng.random() < cfg.nonlinear_fraction:
            func = LinkFunction.NONLIN_F1
        if (i, tau, j) not in links:
            links[(i, tau, j)] = Link(i, tau, j, coeff, func)
    return list(links.values())


def _draw_noise(cfg: ModelConfig, rng: np.random.Generator) -> list[NoiseSpec]:
    if cfg.kind == ModelKind.DISCRETE:
        return [NoiseSpec(NoiseDist.BINOM, float(cfg.n_bin)) for _ in range(cfg.n_total)]
    specs = []
    for _ in range(cfg.n_total):
        sigma = float(rng.uniform(*cfg.sigma_range))
        weibull = cfg.kind == ModelKind.NONLINEAR and rng.random() < cfg.weibull_fraction
        specs.append(NoiseSpec(NoiseDist.WEIBULL if weibull else NoiseDist.GAUSS, sigma))
    return specs


def draw_model(cfg: ModelConfig, rng: np.random.Generator) -> GroundTruthModel:
    """One unscreened draw from the model family."""
    low = max(0.0, cfg.autocorr - 0.3)
    links: list[Link] = []
    for j in range(cfg.n_total):
        a_j = float(rng.uniform(low, cfg.autocorr)) if cfg.autocorr > 0 else 0.0
        if a_j != 0.0:
            links.append(Link(j, 1, j, a_j))
    links.extend(_draw_cross_links(cfg, rng))
    noise = _draw_noise(cfg, rng)
    observed = sorted(int(v) for v in rng.choice(cfg.n_total, size=cfg.n_observed, replace=False))
    return GroundTruthModel(n_vars=cfg.n_total, links=links, observed=observed, noise=noise)


def rejection_reason(model: GroundTruthModel, rng: np.random.Generator) -> str | None:
    """None for an acceptable model, else a short reason."""
    if model.is_linear:
        radius = spectral_radius(model)
        return None if radius < 1.0 else f"spectral radius {radius:.4f} >= 1"
    try:
        simulate(model, SCREEN_STEPS, rng, burn=0)
    except ExplosiveTrajectoryError as e:
        return str(e)
    return None


def random_model(cfg: ModelConfig, seed: int | None = None) -> GroundTruthModel:
    """Draw a stationary model.

    Linear draws are screened by spectral radius, nonlinear ones by a short screening run.

    Raises:
        StationarityRejectionError: If MAX_ATTEMPTS draws are all rejected
        ValueError: If the configuration asks for more cross links than exist
    """
    rng = np.random.default_rng(seed)
    reason = "no draw"
    for attempt in range(1, MAX_ATTEMPTS + 1):
        model = draw_model(cfg, rng)
        reason = rejection_reason(model, rng) or ""
        if not reason:
            if attempt > 1:
                logger.debug("Accepted model after %d draws", attempt)
            return model
        if attempt == WARN_ATTEMPTS:
            logger.warning("Stationarity screening rejected %d draws (last: %s)", attempt, reason)
    raise StationarityRejectionError(MAX_ATTEMPTS, reason)


# =============================================================================
# Sampling
# =============================================================================


def _draw_noise_matrix(
    model: GroundTruthModel, steps: int, rng: np.random.Generator
) -> npt.NDArray[np.float64]:
    noise = np.empty((steps, model.n_vars))
    for j, spec in enumerate(model.noise):
        if spec.dist == NoiseDist.GAUSS:
            noise[:, j] = rng.normal(0.0, 1.0, steps) * spec.scale
        elif spec.dist == NoiseDist.WEIBULL:
            noise[:, j] = (rng.weibull(2.0, steps) - _WEIBULL_MEAN) / _WEIBULL_STD * spec.scale
        else:
            n_bin = int(spec.scale)
            noise[:, j] = rng.binomial(n_bin, 0.5, steps) - n_bin / 2
    return noise


def simulate(
    model: GroundTruthModel,
    steps: int,
    rng: np.random.Generator,
    burn: int | None = None,
) -> npt.NDArray[np.float64]:
    """All model variables for `steps` time points after `burn` discarded steps.

    Raises:
        ExplosiveTrajectoryError: If a value exceeds EXPLOSION_THRESHOLD in magnitude
    """
    if burn is None:
        burn = burn_in(model.p_ts, spectral_radius(model) if model.is_linear else None)
    pad = max(model.p_ts, 1)
    total = pad + burn + steps
    noise = _draw_noise_matrix(model, total, rng)
    values = np.zeros((total, model.n_vars))
    order = model.graph.contemporaneous_order()
    parents = {
        j: [
            (link.i, link.tau, link.coeff, link.func == LinkFunction.NONLIN_F1)
            for link in model.links_into(j)
        ]
        for j in order
    }
    half = model.n_bin / 2

    for t in range(pad, total):
        for j in order:
            value = noise[t, j]
            for i, tau, coeff, nonlinear in parents[j]:
                x = values[t - tau, i]
                value += coeff * (nonlin_f1(x) if nonlinear else x)
            if model.is_discrete:
                value = float(np.clip(np.rint(value), -half, half))
            elif not abs(value) <= EXPLOSION_THRESHOLD:
                raise ExplosiveTrajectoryError(t - pad, j, value)
            values[t, j] = value
    return values[pad + burn :]


def sample(model: GroundTruthModel, T: int, seed: int | None = None) -> npt.NDArray[np.float64]:
    """T x N matrix of the observed columns.

    Discrete models are shifted by n_bin / 2, so their values lie in 0..n_bin.

    Raises:
        ValueError: If T is not positive
        ExplosiveTrajectoryError: If the trajectory explodes
    """
    if T < 1:
        raise ValueError(f"T must be positive. Got: {T}")
    values = simulate(model, T, np.random.default_rng(seed))
    observed = values[:, sorted(model.observed)]
    if model.is_discrete:
        observed = observed + model.n_bin / 2
    return np.asarray(observed)


def column_names(n: int) -> list[str]:
    return [f"X{v}" for v in range(n)]


def split_seed(seed: int) -> tuple[int, int]:
    """Independent (model, data) seeds derived from one replication seed."""
    model_seq, data_seq = np.random.SeedSequence(seed).spawn(2)
    return int(model_seq.generate_state(1)[0]), int(data_seq.generate_state(1)[0])


# =============================================================================
# Service
# =============================================================================


@dataclass(frozen=True)
class SimulationRequest:
    """Request parameters for one simulated dataset.

    Attributes:
        T: Number of time points
        seed: Seed of the model draw and of the sampler
        model_config: Model family to draw from (ignored when model is given)
        model: Fixed model to sample instead of drawing one
    """

    T: int
    seed: int
    model_config: ModelConfig = field(default_factory=ModelConfig)
    model: GroundTruthModel | None = None

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ValueError(f"T must be positive. Got: {self.T}")


@dataclass
class SimulationResponse:
    """Drawn (or given) model and its observed data with columns X0..X{N-1}."""

    model: GroundTruthModel
    data: pd.DataFrame
    seed: int

    def summary(self) -> dict[str, object]:
        return {
            "n_vars": self.model.n_vars,
            "observed": sorted(self.model.observed),
            "n_links": len(self.model.links),
            "T": len(self.data),
            "seed": self.seed,
        }


class SimulationService:
    """Draws models and samples their observed series."""

    def simulate(self, request: SimulationRequest) -> SimulationResponse:
        """Execute the simulation.

        Workflow:
        1. Draw a stationary model unless one is given
        2. Sample observed columns with an independent stream
        """
        # Step 1: Model; the sampler has its own child seed
        model_seed, data_seed = split_seed(request.seed)
        model = request.model or random_model(request.model_config, model_seed)

        # Step 2: Data
        values = sample(model, request.T, data_seed)
        data = pd.DataFrame(values, columns=column_names(values.shape[1]))
        if model.is_discrete:
            data = data.astype(int)
        logger.info(
            "Simulated %d steps of %d observed variables (%d latent)",
            request.T,
            len(model.observed),
            model.n_vars - len(model.observed),
        )
        return SimulationResponse(model=model, data=data, seed=request.seed)


def create_simulation_service() -> SimulationService:
    """Factory function to create SimulationService."""
    return SimulationService()
