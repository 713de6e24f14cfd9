"""GTestAdapter - Stratified G-test of conditional independence for discrete data.

A contingency table of X and Y is built for every observed combination of
the conditioning values. G statistics and degrees of freedom are summed over
strata; a total below one degree of freedom is read as independence.
"""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy import stats

from src.adapters.parcorr_adapter import lagged_columns
from src.core.domain.graph import node_sort_key
from src.core.ports.ci_port import CIQuery, CIResult, InsufficientSamplesError

logger = logging.getLogger(__name__)


def g_statistic(table: npt.NDArray[np.float64]) -> tuple[float, int]:
    """G statistic and degrees of freedom of one contingency table.

    Rows and columns with zero counts only are dropped first.
    """
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if table.size == 0:
        return 0.0, 0
    n_rows, n_cols = table.shape
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / table.sum()
    observed = table > 0
    g = 2.0 * float(np.sum(table[observed] * np.log(table[observed] / expected[observed])))
    return max(g, 0.0), (n_rows - 1) * (n_cols - 1)


class GTestAdapter:
    """CI test for integer-valued data.

    Attributes:
        name: "gtest"
    """

    name = "gtest"

    def __init__(self, data: npt.ArrayLike | pd.DataFrame) -> None:
        values = data.to_numpy() if isinstance(data, pd.DataFrame) else np.asarray(data)
        if values.ndim != 2:
            raise ValueError(f"G-test data must be 2-D (T x N). Got shape {values.shape}")
        if values.shape[0] == 0:
            raise ValueError("G-test data is empty")
        if not np.all(np.equal(np.mod(values, 1), 0)):
            raise ValueError("G-test data must be integer valued")
        self._data = values.astype(np.int64).astype(np.float64)

    def run_test(self, query: CIQuery) -> CIResult:
        """G-test of query.x and query.y given query.cond."""
        canon = query.canonical()
        cond = sorted(canon.cond, key=node_sort_key)
        max_lag = canon.max_lag
        if self._data.shape[0] - max_lag < 1:
            raise InsufficientSamplesError(query, required=max_lag + 1, available=self._data.shape[0])

        columns = lagged_columns(self._data, [canon.x, canon.y, *cond], max_lag).astype(np.int64)
        x, y, z = columns[:, 0], columns[:, 1], columns[:, 2:]

        if z.shape[1]:
            _, strata = np.unique(z, axis=0, return_inverse=True)
            strata = strata.reshape(-1)
        else:
            strata = np.zeros(len(x), dtype=np.int64)

        total_g, total_dof = 0.0, 0
        for stratum in np.unique(strata):
            mask = strata == stratum
            table = pd.crosstab(x[mask], y[mask]).to_numpy(dtype=float)
            g, dof = g_statistic(table)
            total_g += g
            total_dof += dof

        if total_dof < 1:
            return CIResult(statistic=total_g, p_value=1.0)
        p_value = float(stats.chi2.sf(total_g, total_dof))
        logger.debug("gtest %s G=%.4f dof=%d p=%.3g", canon, total_g, total_dof, p_value)
        return CIResult(statistic=total_g, p_value=p_value)
