"""CachedCIAdapter - Canonical-key result cache and test bookkeeping.

Wraps any CITestPort. Identical canonical queries are answered once per
run; the wrapper also counts tests and tracks the largest conditioning set
used per homologous pair for the benchmark metrics.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from src.core.domain.graph import SlotKey, canonical_key
from src.core.ports.ci_port import CIQuery, CIResult, CITestError

if TYPE_CHECKING:
    from src.core.ports.ci_port import CITestPort


class CachedCIAdapter:
    """Caching wrapper around a CI test.

    Attributes:
        name: Name of the wrapped test
        n_calls: Number of run_test calls
        n_tests: Number of distinct tests executed
    """

    def __init__(self, inner: "CITestPort") -> None:
        self._inner = inner
        self.name = inner.name
        self._cache: dict[object, CIResult | CITestError] = {}
        self.n_calls = 0
        self.n_tests = 0
        self._max_cardinality: dict[SlotKey, int] = {}

    @property
    def inner(self) -> "CITestPort":
        return self._inner

    def run_test(self, query: CIQuery) -> CIResult:
        self.n_calls += 1
        key = query.key()
        if key not in self._cache:
            self.n_tests += 1
            slot, _, _ = canonical_key(query.x, query.y)
            self._max_cardinality[slot] = max(self._max_cardinality.get(slot, 0), len(query.cond))
            try:
                self._cache[key] = self._inner.run_test(query)
            except CITestError as e:
                self._cache[key] = e
        cached = self._cache[key]
        if isinstance(cached, CITestError):
            raise cached
        return cached

    def max_cardinality(self, slot: SlotKey) -> int | None:
        """Largest conditioning set tested for a pair, None if never tested."""
        return self._max_cardinality.get(slot)

    @property
    def overall_max_cardinality(self) -> int:
        return max(self._max_cardinality.values(), default=0)

    def clear(self) -> None:
        self._cache.clear()
