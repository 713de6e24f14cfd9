"""CITestPort Protocol - Abstract interface for conditional independence tests.

This port defines the contract shared by ParCorr, the G-test and the
d-separation oracle. Queries are made on time series nodes; an adapter
maps them onto data columns (or onto the ground-truth graph).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from src.core.domain.graph import NodeRef, node_sort_key


@dataclass(frozen=True)
class CIQuery:
    """A conditional independence query X _||_ Y | Z.

    Attributes:
        x: First node
        y: Second node
        cond: Conditioning nodes

    Invariants:
        - x != y
        - x, y not in cond
    """

    x: NodeRef
    y: NodeRef
    cond: frozenset[NodeRef] = frozenset()

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ValueError(f"CIQuery needs two distinct nodes. Got: {self.x}")
        if self.x in self.cond or self.y in self.cond:
            raise ValueError(f"CIQuery conditioning set must not contain {self.x} or {self.y}")

    @property
    def max_lag(self) -> int:
        return max(node.lag for node in (self.x, self.y, *self.cond))

    def canonical(self) -> CIQuery:
        """Shift so the later of x, y sits at lag 0 and order x before y."""
        shift = min(self.x.lag, self.y.lag)
        x, y = self.x.shift(-shift), self.y.shift(-shift)
        if node_sort_key(y) < node_sort_key(x):
            x, y = y, x
        cond = frozenset(node.shift(-shift) for node in self.cond)
        return CIQuery(x, y, cond)

    def key(self) -> tuple[tuple[int, int], tuple[int, int], tuple[tuple[int, int], ...]]:
        """Hashable canonical key: (x, y sorted, cond sorted)."""
        canon = self.canonical()
        return (
            (canon.x.var, canon.x.lag),
            (canon.y.var, canon.y.lag),
            tuple(sorted(((n.var, n.lag) for n in canon.cond), key=lambda p: (-p[1], p[0]))),
        )

    def __str__(self) -> str:
        cond = ", ".join(str(n) for n in sorted(self.cond, key=node_sort_key))
        return f"{self.x} _||_ {self.y} | {{{cond}}}"


@dataclass(frozen=True)
class CIResult:
    """Outcome of a CI test.

    Attributes:
        statistic: Absolute test statistic (drives I^min bookkeeping)
        p_value: p-value in [0, 1]
    """

    statistic: float
    p_value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"CIResult p_value must lie in [0, 1]. Got: {self.p_value}")
        if self.statistic != self.statistic or self.statistic in (float("inf"), float("-inf")):
            raise ValueError(f"CIResult statistic must be finite. Got: {self.statistic}")


class CITestError(Exception):
    """Base class for CI test failures."""


class DegenerateTestError(CITestError):
    """Raised when a regression residual vanishes and no verdict can be given."""

    def __init__(self, query: CIQuery, detail: str) -> None:
        self.query = query
        self.detail = detail
        super().__init__(f"Degenerate CI test {query}: {detail}")


class InsufficientSamplesError(CITestError):
    """Raised when too few aligned samples remain for the test."""

    def __init__(self, query: CIQuery, required: int, available: int) -> None:
        self.query = query
        self.required = required
        self.available = available
        super().__init__(
            f"CI test {query} needs at least {required} samples, {available} available"
        )


class CIQueryError(CITestError):
    """Wraps a CI failure inside a discovery run with the query that caused it."""

    def __init__(self, query: CIQuery, cause: Exception) -> None:
        self.query = query
        self.cause = cause
        super().__init__(f"CI test {query} failed: {cause}")


@runtime_checkable
class CITestPort(Protocol):
    """Abstract interface for conditional independence tests.

    Implementations:
    - ParCorrAdapter: linear partial correlation with Student-t p-values
    - GTestAdapter: stratified G-test for discrete data
    - OracleCIAdapter: d-separation on the ground-truth time series graph
    - CachedCIAdapter: canonical-key caching and bookkeeping around any of the above
    """

    name: str

    def run_test(self, query: CIQuery) -> CIResult:
        """Run one conditional independence test.

        Args:
            query: Nodes to test and conditioning set

        Returns:
            CIResult with absolute statistic and p-value

        Raises:
            DegenerateTestError: If the test cannot give a verdict
            InsufficientSamplesError: If the lagged alignment leaves too few samples

        Pre-conditions:
            - all nodes refer to variables known to the adapter

        Post-conditions:
            - result depends only on the canonical form of the query
        """
        ...
