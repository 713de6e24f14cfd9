"""RelabeledCIAdapter - Presents a CI test under permuted variable labels.

Variable v of the wrapped test appears as perm[v]. Running discovery on
the relabeled test is the same as running it on a dataset whose columns
were reordered by perm, without touching the numbers a test computes.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from src.core.domain.graph import NodeRef
from src.core.ports.ci_port import CIQuery, CIResult

if TYPE_CHECKING:
    from src.core.ports.ci_port import CITestPort


class RelabeledCIAdapter:
    """Relabeling wrapper around a CI test.

    Attributes:
        name: Name of the wrapped test
        perm: Original variable v is shown as perm[v]
    """

    def __init__(self, inner: "CITestPort", perm: list[int]) -> None:
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"perm must be a permutation of 0..{len(perm) - 1}. Got: {perm}")
        self._inner = inner
        self.name = inner.name
        self.perm = list(perm)
        self._original = [0] * len(perm)
        for v, shown in enumerate(perm):
            self._original[shown] = v

    def _restore(self, node: NodeRef) -> NodeRef:
        return NodeRef(self._original[node.var], node.lag)

    def run_test(self, query: CIQuery) -> CIResult:
        return self._inner.run_test(
            CIQuery(
                self._restore(query.x),
                self._restore(query.y),
                frozenset(self._restore(n) for n in query.cond),
            )
        )
