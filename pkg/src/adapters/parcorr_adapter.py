"""ParCorrAdapter - Linear partial correlation CI test.

Regresses both tested series on the conditioning series (with intercept),
correlates the residuals and converts the correlation into a two-sided
Student-t p-value. Samples are aligned on the common range [max_lag, T).
"""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy import stats

from src.core.domain.graph import NodeRef, node_sort_key
from src.core.ports.ci_port import (
    CIQuery,
    CIResult,
    DegenerateTestError,
    InsufficientSamplesError,
)

logger = logging.getLogger(__name__)

DEGENERACY_RATIO = 1e-12
PERFECT_CORRELATION = 1.0 - 1e-12


def lagged_columns(
    data: npt.NDArray[np.float64], nodes: list[NodeRef], max_lag: int
) -> npt.NDArray[np.float64]:
    """Stack node series as columns; row t holds X^var_{t-lag} for t in [max_lag, T)."""
    n_rows = data.shape[0]
    return np.column_stack(
        [data[max_lag - node.lag : n_rows - node.lag, node.var] for node in nodes]
    ) if nodes else np.empty((n_rows - max_lag, 0))


def residualize(
    target: npt.NDArray[np.float64], design: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Residual of an OLS fit with intercept (minimum-norm for rank-deficient designs)."""
    full = np.column_stack([np.ones(len(target)), design])
    beta, *_ = np.linalg.lstsq(full, target, rcond=None)
    return np.asarray(target - full @ beta)


def correlation_p_value(r: float, dof: int) -> float:
    """Two-sided p-value of a (partial) correlation under the Student-t null."""
    if abs(r) >= PERFECT_CORRELATION:
        return 0.0
    t_stat = r * np.sqrt(dof / (1.0 - r * r))
    return float(min(1.0, 2.0 * stats.t.sf(abs(t_stat), dof)))


class ParCorrAdapter:
    """CI test based on linear partial correlation.

    Attributes:
        name: "parcorr"
    """

    name = "parcorr"

    def __init__(self, data: npt.ArrayLike | pd.DataFrame) -> None:
        """Initialize with a T x N data matrix.

        Raises:
            ValueError: If the data is not a finite 2-D array
        """
        values = data.to_numpy(dtype=float) if isinstance(data, pd.DataFrame) else np.asarray(data, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"ParCorr data must be 2-D (T x N). Got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("ParCorr data contains NaN or infinite values")
        self._data: npt.NDArray[np.float64] = values

    @property
    def n_vars(self) -> int:
        return int(self._data.shape[1])

    @property
    def n_samples(self) -> int:
        return int(self._data.shape[0])

    def run_test(self, query: CIQuery) -> CIResult:
        """Partial correlation test of query.x and query.y given query.cond."""
        canon = query.canonical()
        cond = sorted(canon.cond, key=node_sort_key)
        max_lag = canon.max_lag
        n = self.n_samples - max_lag
        if n < len(cond) + 3:
            raise InsufficientSamplesError(query, required=len(cond) + 3 + max_lag, available=self.n_samples)

        columns = lagged_columns(self._data, [canon.x, canon.y, *cond], max_lag)
        x, y, z = columns[:, 0], columns[:, 1], columns[:, 2:]

        residuals = []
        for series, label in ((x, canon.x), (y, canon.y)):
            variance = float(np.var(series))
            res = residualize(series, z)
            if variance == 0.0 or float(np.var(res)) < DEGENERACY_RATIO * variance:
                raise DegenerateTestError(
                    query, f"residual of {label} vanishes after regression on the conditions"
                )
            residuals.append(res)

        res_x, res_y = residuals
        r = float(np.dot(res_x, res_y) / np.sqrt(np.dot(res_x, res_x) * np.dot(res_y, res_y)))
        r = max(-1.0, min(1.0, r))
        dof = n - len(cond) - 2
        p_value = correlation_p_value(r, dof)
        logger.debug("parcorr %s r=%.6f p=%.3g n=%d", canon, r, p_value, n)
        return CIResult(statistic=abs(r), p_value=p_value)
