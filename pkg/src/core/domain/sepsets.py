"""SepSetStore Domain Object - Separating sets and minimum-statistic memory.

Stores, per homologous node pair:
- Every separating set recorded during a run (sets accumulate, never overwrite)
- I^min, the minimum absolute test statistic seen for the pair
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator
from typing import Any

from src.core.domain.graph import NodeRef, SlotKey, canonical_key


class SepSetLookupError(LookupError):
    """Raised when a separating set is required but none is known."""

    def __init__(self, a: NodeRef, b: NodeRef) -> None:
        self.pair = (a, b)
        super().__init__(f"No separating set recorded or found for {a} and {b}")


RelativeSet = frozenset[tuple[int, int]]


class SepSetStore:
    """Separating sets keyed by canonical pair.

    Sets are held relative to the later node of the pair, so a query for any
    time-shifted copy of the pair returns the shifted sets. With tau_max set,
    shifted sets with a member past lag tau_max are left out.

    Invariants:
        - I^min per pair is non-increasing
        - add() never removes a previously recorded set
        - get() only returns sets inside the window when tau_max is set
    """

    def __init__(self, tau_max: int | None = None) -> None:
        if tau_max is not None and tau_max < 0:
            raise ValueError(f"tau_max must be non-negative. Got: {tau_max}")
        self.tau_max = tau_max
        self._sets: dict[SlotKey, list[RelativeSet]] = {}
        self._imin: dict[SlotKey, float] = {}

    def reset(self) -> None:
        self._sets.clear()
        self._imin.clear()

    def add(self, a: NodeRef, b: NodeRef, sepset: Iterable[NodeRef]) -> None:
        """Record a separating set for the pair (a, b).

        Raises:
            ValueError: If the set contains a or b, or a node after both of them
        """
        key, shift, _ = canonical_key(a, b)
        members = set(sepset)
        if a in members or b in members:
            raise ValueError(f"Separating set for {a}, {b} must not contain the pair itself")
        relative: set[tuple[int, int]] = set()
        for node in members:
            if node.lag < shift:
                raise ValueError(f"Separating set member {node} lies after both {a} and {b}")
            relative.add((node.var, node.lag - shift))
        stored = self._sets.setdefault(key, [])
        frozen = frozenset(relative)
        if frozen not in stored:
            stored.append(frozen)

    def get(self, a: NodeRef, b: NodeRef) -> list[frozenset[NodeRef]]:
        """Recorded separating sets for (a, b), shifted to the pair's position."""
        key, shift, _ = canonical_key(a, b)
        limit = None if self.tau_max is None else self.tau_max - shift
        return [
            frozenset(NodeRef(var, lag + shift) for var, lag in relative)
            for relative in self._sets.get(key, [])
            if limit is None or all(lag <= limit for _, lag in relative)
        ]

    def has(self, a: NodeRef, b: NodeRef) -> bool:
        key, _, _ = canonical_key(a, b)
        return bool(self._sets.get(key))

    def imin(self, a: NodeRef, b: NodeRef) -> float:
        key, _, _ = canonical_key(a, b)
        return self._imin.get(key, math.inf)

    def update_imin(self, a: NodeRef, b: NodeRef, statistic: float) -> None:
        key, _, _ = canonical_key(a, b)
        if statistic < self._imin.get(key, math.inf):
            self._imin[key] = statistic

    def imin_snapshot(self) -> dict[SlotKey, float]:
        return dict(self._imin)

    def items(self) -> Iterator[tuple[SlotKey, list[frozenset[NodeRef]]]]:
        """Canonical pairs (i, tau, j) with their sets at the canonical position."""
        for key in sorted(self._sets):
            yield key, [
                frozenset(NodeRef(var, lag) for var, lag in relative) for relative in self._sets[key]
            ]

    def __len__(self) -> int:
        return sum(len(sets) for sets in self._sets.values())

    def to_dict(self) -> dict[str, Any]:
        """Serialize for trace output."""
        return {
            f"{i},{tau},{j}": [sorted(list(member) for member in relative) for relative in sets]
            for (i, tau, j), sets in sorted(self._sets.items())
        }
