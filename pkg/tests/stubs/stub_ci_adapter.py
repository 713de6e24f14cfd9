"""StubCIAdapter - Scripted implementation of CITestPort.

Answers from a table of declared independencies instead of data, so the
separation and orientation logic can be tested on hand-built cases.
Every query is recorded in arrival order.
"""

from __future__ import annotations

from collections.abc import Iterable

from src.core.domain.graph import NodeRef
from src.core.ports.ci_port import CIQuery, CIResult, DegenerateTestError

QueryKey = tuple[tuple[int, int], tuple[int, int], tuple[tuple[int, int], ...]]


class StubCIAdapter:
    """In-memory test stub for CITestPort.

    Queries not declared independent are dependent with p = 0 and a
    statistic of 1, unless a statistic was scripted for the pair.
    """

    name = "stub"

    def __init__(self) -> None:
        self._independent: dict[QueryKey, float] = {}
        self._degenerate: set[QueryKey] = set()
        self._dependence: dict[QueryKey, float] = {}
        self.queries: list[CIQuery] = []

    @staticmethod
    def _key(x: NodeRef, y: NodeRef, cond: Iterable[NodeRef]) -> QueryKey:
        return CIQuery(x, y, frozenset(cond)).key()

    def declare_independent(
        self, x: NodeRef, y: NodeRef, cond: Iterable[NodeRef] = (), p_value: float = 0.5
    ) -> None:
        self._independent[self._key(x, y, cond)] = p_value

    def declare_dependent(
        self, x: NodeRef, y: NodeRef, cond: Iterable[NodeRef] = (), statistic: float = 1.0
    ) -> None:
        """Script the statistic of a dependent verdict (drives I^min ordering)."""
        self._dependence[self._key(x, y, cond)] = statistic

    def declare_degenerate(self, x: NodeRef, y: NodeRef, cond: Iterable[NodeRef] = ()) -> None:
        self._degenerate.add(self._key(x, y, cond))

    def run_test(self, query: CIQuery) -> CIResult:
        self.queries.append(query)
        key = query.key()
        if key in self._degenerate:
            raise DegenerateTestError(query, "scripted degeneracy")
        if key in self._independent:
            return CIResult(statistic=0.0, p_value=self._independent[key])
        return CIResult(statistic=self._dependence.get(key, 1.0), p_value=0.0)
