"""DiscoveryState Domain Object - Mutable state of one discovery run.

Bundles the LPCMCI-PAG under construction, the separating-set memory and the
record of every parentship seen since the last re-initialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from src.core.domain.discovery_config import DiscoveryConfig
from src.core.domain.graph import Edge, EndMark, MiddleMark, NodeRef, SlotKey, WindowGraph
from src.core.domain.sepsets import SepSetStore

# (slot key, True if the slot's i-end was the parent)
ParentLink = tuple[SlotKey, bool]


@dataclass
class DiscoveryState:
    """Graph, separating sets and parent memory of a run.

    Attributes:
        graph: Current LPCMCI-PAG
        config: Run parameters
        sepsets: Recorded separating sets and I^min
        ever_parent_links: Homologous links that were ever oriented as parentships

    Invariants:
        - graph window matches config.tau_max
        - ever_parents(node) contains pa(node) of the current graph
    """

    graph: WindowGraph
    config: DiscoveryConfig
    sepsets: SepSetStore = field(default_factory=SepSetStore)
    ever_parent_links: set[ParentLink] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.sepsets.tau_max is None:
            self.sepsets.tau_max = self.config.tau_max
        self._validate_invariants()

    def _validate_invariants(self) -> None:
        if self.sepsets.tau_max != self.config.tau_max:
            raise ValueError(
                f"SepSetStore tau_max {self.sepsets.tau_max} does not match config tau_max "
                f"{self.config.tau_max}"
            )
        if self.graph.tau_max != self.config.tau_max:
            raise ValueError(
                f"Graph tau_max {self.graph.tau_max} does not match config tau_max "
                f"{self.config.tau_max}"
            )

    @classmethod
    def initial(cls, n_vars: int, config: DiscoveryConfig) -> DiscoveryState:
        """Complete initial graph with empty memories."""
        return cls(WindowGraph.complete(n_vars, config.tau_max), config)

    def record_parents(self) -> int:
        """Add every current parentship to the memory; return the number of new links."""
        before = len(self.ever_parent_links)
        for edge in self.graph.edges():
            key = (edge.a.var, edge.a.lag, edge.b.var)
            if edge.mark_at_a == EndMark.TAIL and edge.mark_at_b == EndMark.HEAD:
                self.ever_parent_links.add((key, True))
            elif edge.mark_at_a == EndMark.HEAD and edge.mark_at_b == EndMark.TAIL:
                self.ever_parent_links.add((key, False))
        return len(self.ever_parent_links) - before

    def ever_parents(self, node: NodeRef) -> set[NodeRef]:
        """Window nodes that have been parents of node since re-initialization."""
        found = set(self.graph.parents(node))
        for (i, tau, j), parent_is_i in self.ever_parent_links:
            if parent_is_i and j == node.var:
                candidate = NodeRef(i, node.lag + tau)
            elif not parent_is_i and i == node.var and node.lag >= tau:
                candidate = NodeRef(j, node.lag - tau)
            else:
                continue
            if candidate != node and self.graph.in_window(candidate):
                found.add(candidate)
        return found

    def default_conditions(self, a: NodeRef, b: NodeRef) -> set[NodeRef]:
        """pa({a, b}) in the current graph, without a and b."""
        return (self.graph.parents(a) | self.graph.parents(b)) - {a, b}

    def reinitialize(self, carry_parents: bool = True) -> int:
        """Start over from the complete graph, keeping current parentships as -?->.

        Separating sets, I^min and the parent memory are cleared.

        Returns:
            Number of carried links
        """
        carried = [
            edge
            for edge in self.graph.edges()
            if {edge.mark_at_a, edge.mark_at_b} == {EndMark.TAIL, EndMark.HEAD}
        ]
        self.graph = WindowGraph.complete(self.graph.n_vars, self.graph.tau_max)
        self.sepsets.reset()
        self.ever_parent_links.clear()
        if not carry_parents:
            return 0
        for edge in carried:
            self.graph.set_edge(
                Edge(edge.a, edge.b, edge.mark_at_a, edge.mark_at_b, MiddleMark.UNKNOWN)
            )
        self.record_parents()
        return len(carried)

    def middle_marks_only(self, allowed: set[MiddleMark]) -> bool:
        return self.graph.middle_marks() <= allowed
