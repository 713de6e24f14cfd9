"""Population covariances and partial correlations of linear models.

This service provides:
1. Lag covariance blocks Gamma(0..tau) of a stable linear SVAR model, from the
   discrete Lyapunov equation of its companion form
2. Population partial correlations of window nodes
3. Effect-size reports: the population statistic for a pair under several
   conditioning sets and its minimum

Node variable indices of reports refer to observed variables, as everywhere
else in the engine; the covariance blocks are over all model variables.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy import linalg

from src.core.domain.ground_truth import GroundTruthModel, NoiseDist
from src.core.domain.graph import NodeRef, node_sort_key

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


class UnstableModelError(ValueError):
    """Raised when the companion matrix has spectral radius >= 1."""

    def __init__(self, spectral_radius: float) -> None:
        self.spectral_radius = spectral_radius
        super().__init__(f"Model is not stable: companion spectral radius {spectral_radius:.6f} >= 1")


class SingularCovarianceError(ValueError):
    """Raised when the joint covariance of a node set is not positive definite."""

    def __init__(self, nodes: Sequence[NodeRef]) -> None:
        self.nodes = tuple(nodes)
        names = ", ".join(str(node) for node in self.nodes)
        super().__init__(f"Joint covariance of {names} is singular")


def _noise_variance(model: GroundTruthModel) -> FloatArray:
    variances = []
    for spec in model.noise:
        if spec.dist == NoiseDist.BINOM:
            raise ValueError("Population covariances are only defined for continuous noise")
        variances.append(spec.scale**2)
    return np.asarray(variances, dtype=float)


def _solved_structure(model: GroundTruthModel) -> tuple[list[FloatArray], FloatArray]:
    if not model.is_linear:
        raise ValueError("Population covariances need a linear model")
    n, p = model.n_vars, max(model.p_ts, 1)
    structural = np.zeros((p + 1, n, n))
    for link in model.links:
        structural[link.tau, link.j, link.i] = link.coeff
    mixing = np.linalg.inv(np.eye(n) - structural[0])
    return [mixing @ structural[tau] for tau in range(1, p + 1)], mixing


def reduced_form(model: GroundTruthModel) -> tuple[list[FloatArray], FloatArray]:
    """Lag matrices A_1..A_p and innovation covariance of the reduced-form VAR.

    Contemporaneous links are solved out: V_t = (I - B_0)^-1 (sum_tau B_tau V_{t-tau} + eta_t).

    Raises:
        ValueError: If the model has nonlinear links or discrete noise
    """
    lag_matrices, mixing = _solved_structure(model)
    innovation = mixing @ np.diag(_noise_variance(model)) @ mixing.T
    return lag_matrices, innovation


def companion(lag_matrices: list[FloatArray], order: int) -> FloatArray:
    """Companion matrix of a VAR padded to `order` stacked lags."""
    n = lag_matrices[0].shape[0]
    big = np.zeros((n * order, n * order))
    for tau, matrix in enumerate(lag_matrices):
        big[:n, tau * n : (tau + 1) * n] = matrix
    big[n:, : n * (order - 1)] = np.eye(n * (order - 1))
    return big


def spectral_radius(model: GroundTruthModel) -> float:
    """Spectral radius of the companion matrix of the linear dynamics; noise is ignored."""
    lag_matrices, _ = _solved_structure(model)
    return float(np.max(np.abs(np.linalg.eigvals(companion(lag_matrices, len(lag_matrices))))))


def stationary_covariance(model: GroundTruthModel, tau_max: int) -> list[FloatArray]:
    """Gamma(tau) = Cov(V_t, V_{t-tau}) for tau = 0..tau_max over all model variables.

    Raises:
        UnstableModelError: If the model is not stable
        ValueError: If the model is nonlinear or discrete
    """
    if tau_max < 0:
        raise ValueError(f"tau_max must be non-negative. Got: {tau_max}")
    lag_matrices, innovation = reduced_form(model)
    n = model.n_vars
    order = max(len(lag_matrices), tau_max + 1)
    big = companion(lag_matrices, order)
    radius = float(np.max(np.abs(np.linalg.eigvals(big))))
    if radius >= 1.0:
        raise UnstableModelError(radius)
    noise = np.zeros_like(big)
    noise[:n, :n] = innovation
    stacked = linalg.solve_discrete_lyapunov(big, noise)
    return [np.array(stacked[:n, tau * n : (tau + 1) * n]) for tau in range(tau_max + 1)]


def joint_covariance(gamma: list[FloatArray], nodes: Sequence[NodeRef]) -> FloatArray:
    """Covariance matrix of the given window nodes (model variable indices).

    Raises:
        ValueError: If a lag difference exceeds the available blocks
    """
    size = len(nodes)
    result = np.zeros((size, size))
    for r, u in enumerate(nodes):
        for c, v in enumerate(nodes):
            delta = v.lag - u.lag
            if abs(delta) >= len(gamma):
                raise ValueError(f"Lag difference {abs(delta)} needs more covariance blocks")
            result[r, c] = gamma[delta][u.var, v.var] if delta >= 0 else gamma[-delta][v.var, u.var]
    return result


def population_parcorr(
    gamma: list[FloatArray], x: NodeRef, y: NodeRef, cond: Iterable[NodeRef] = ()
) -> float:
    """Partial correlation of x and y given cond from the joint covariance.

    Raises:
        SingularCovarianceError: If the joint covariance is not positive definite
    """
    nodes = [x, y, *sorted(set(cond) - {x, y}, key=node_sort_key)]
    cov = joint_covariance(gamma, nodes)
    try:
        linalg.cholesky(cov)
    except linalg.LinAlgError as e:
        raise SingularCovarianceError(nodes) from e
    precision = np.linalg.inv(cov)
    return float(-precision[0, 1] / np.sqrt(precision[0, 0] * precision[1, 1]))


@dataclass
class EffectSizeReport:
    """Population statistics of one pair under several conditioning sets.

    Attributes:
        x: First node (observed index)
        y: Second node (observed index)
        values: (conditioning set, |partial correlation|) in input order
    """

    x: NodeRef
    y: NodeRef
    values: list[tuple[frozenset[NodeRef], float]] = field(default_factory=list)

    @property
    def minimum(self) -> float:
        """Effect size: the smallest absolute statistic over the sets."""
        return min((value for _, value in self.values), default=float("nan"))

    def to_dict(self) -> dict[str, object]:
        return {
            "x": self.x.to_list(),
            "y": self.y.to_list(),
            "values": [
                {"cond": [n.to_list() for n in sorted(cond, key=node_sort_key)], "value": value}
                for cond, value in self.values
            ],
            "minimum": self.minimum,
        }


def effect_size_report(
    model: GroundTruthModel,
    pair: tuple[NodeRef, NodeRef],
    cond_sets: Iterable[Iterable[NodeRef]],
) -> EffectSizeReport:
    """Population |partial correlation| of an observed pair under every conditioning set."""
    sets = [frozenset(cond) for cond in cond_sets]
    x, y = pair
    nodes = [x, y, *(node for cond in sets for node in cond)]
    span = max(node.lag for node in nodes) - min(node.lag for node in nodes)
    gamma = stationary_covariance(model, span)
    observed = sorted(model.observed)

    def lift(node: NodeRef) -> NodeRef:
        return NodeRef(observed[node.var], node.lag)

    report = EffectSizeReport(x, y)
    for cond in sets:
        value = abs(population_parcorr(gamma, lift(x), lift(y), [lift(n) for n in cond]))
        report.values.append((cond, value))
        logger.debug("population parcorr %s, %s | %s = %.6f", x, y, sorted(cond, key=node_sort_key), value)
    return report
