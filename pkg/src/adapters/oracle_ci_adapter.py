"""OracleCIAdapter - Perfect CI decisions read off the ground-truth graph.

Answers p = 1 and statistic 0 for d-separated queries, p = 0 and statistic 1
otherwise. Variable indices of queries refer to the observed variables.
"""

from __future__ import annotations

import logging

from src.core.domain.ground_truth import GroundTruthGraph, GroundTruthModel
from src.core.ports.ci_port import CIQuery, CIResult
from src.core.services.oracle_service import TimeSeriesOracle

logger = logging.getLogger(__name__)


class OracleCIAdapter:
    """d-separation oracle behind the CITestPort interface.

    Attributes:
        name: "oracle"
        oracle: Ground-truth oracle answering the queries
    """

    name = "oracle"

    def __init__(self, oracle: TimeSeriesOracle) -> None:
        self.oracle = oracle

    @classmethod
    def from_truth(cls, truth: GroundTruthGraph | GroundTruthModel, tau_max: int) -> OracleCIAdapter:
        graph = truth.graph if isinstance(truth, GroundTruthModel) else truth
        return cls(TimeSeriesOracle(graph, tau_max))

    def run_test(self, query: CIQuery) -> CIResult:
        canon = query.canonical()
        separated = self.oracle.d_separated(canon.x, canon.y, canon.cond)
        logger.debug("oracle %s -> %s", canon, "independent" if separated else "dependent")
        if separated:
            return CIResult(statistic=0.0, p_value=1.0)
        return CIResult(statistic=1.0, p_value=0.0)
