"""Unit tests for CI invocation, candidate sets, weak minimization and voters."""

import math

import pytest

from src.adapters.trace_adapter import TraceRecorder
from src.core.domain.discovery_config import DiscoveryConfig
from src.core.domain.discovery_state import DiscoveryState
from src.core.domain.graph import Edge, EndMark, MiddleMark, NodeRef, WindowGraph
from src.core.domain.sepsets import SepSetLookupError, SepSetStore
from src.core.ports.ci_port import CIQuery, CIQueryError, CIResult, InsufficientSamplesError
from src.core.services.oracle_check_service import random_check_models
from src.core.services.oracle_service import TimeSeriesOracle, d_sep_set
from src.core.services.separation import (
    AdjacencyMajorityVoter,
    CIRunner,
    ModifiedMajorityVoter,
    NotSeparatingError,
    RecordedSetsVoter,
    Vote,
    apds_t,
    known_ancestors,
    napds_t,
    order_by_imin,
    pds_t,
    sepset_vote,
    weakly_minimize,
)
from tests.stubs.stub_ci_adapter import StubCIAdapter

N = [NodeRef(v, 0) for v in range(5)]


def _edge(u: int, v: int, at_u: EndMark, at_v: EndMark) -> Edge:
    return Edge(N[u], N[v], at_u, at_v)


def _circle_square() -> WindowGraph:
    """0 o-o 1 o-o 2 and 0 o-o 3 o-o 2, with 0 and 2 non-adjacent."""
    graph = WindowGraph(4, 0)
    for u, v in ((0, 1), (1, 2), (0, 3), (3, 2)):
        graph.set_edge(_edge(u, v, EndMark.CIRCLE, EndMark.CIRCLE))
    return graph


class _ShortSeries:
    name = "short"

    def run_test(self, query: CIQuery) -> CIResult:
        raise InsufficientSamplesError(query, required=10, available=3)


class TestCIRunner:
    """Test CI invocation inside a run."""

    def test_independence_updates_imin_and_trace(self) -> None:
        """p above alpha is independence; the statistic feeds I^min."""
        stub = StubCIAdapter()
        stub.declare_independent(N[0], N[1], p_value=0.3)
        recorder = TraceRecorder()
        sepsets = SepSetStore()
        runner = CIRunner(stub, alpha=0.05, trace=recorder)

        outcome = runner.test(N[0], N[1], [], "ancestral", sepsets)

        assert outcome.independent
        assert outcome.p_value == 0.3
        assert sepsets.imin(N[0], N[1]) == 0.0
        assert recorder.actions() == {"removed": 1}

    def test_degenerate_test_is_dependence(self) -> None:
        """Degenerate tests keep the edge and are counted."""
        stub = StubCIAdapter()
        stub.declare_degenerate(N[0], N[1])
        recorder = TraceRecorder()
        runner = CIRunner(stub, alpha=0.05, trace=recorder)

        outcome = runner.test(N[0], N[1], [], "ancestral")

        assert not outcome.independent
        assert outcome.degenerate
        assert math.isinf(outcome.statistic)
        assert runner.n_degenerate == 1
        assert recorder.actions() == {"degenerate": 1}

    def test_other_failures_name_the_query(self) -> None:
        """Non-degenerate failures abort with the failing query attached."""
        runner = CIRunner(_ShortSeries(), alpha=0.05)

        with pytest.raises(CIQueryError, match="needs at least 10 samples") as excinfo:
            runner.test(N[0], N[1], [N[2]], "ancestral")

        assert excinfo.value.query == CIQuery(N[0], N[1], frozenset({N[2]}))


class TestCandidateSets:
    """Test apds_t, pds_t and ancestor collection."""

    def test_apds_t_excludes_heads_at_candidates(self) -> None:
        """Neighbors of b with an arrowhead at themselves are dropped."""
        graph = WindowGraph(4, 0)
        graph.set_edge(_edge(0, 1, EndMark.CIRCLE, EndMark.CIRCLE))
        graph.set_edge(_edge(1, 2, EndMark.CIRCLE, EndMark.HEAD))
        graph.set_edge(_edge(1, 3, EndMark.HEAD, EndMark.CIRCLE))

        assert apds_t(graph, N[1], N[0]) == {N[3]}

    def test_napds_t_single_spouse(self) -> None:
        """A spouse of b that is not adjacent to a is a candidate, apds_t misses it."""
        graph = WindowGraph(3, 0)
        graph.set_edge(_edge(0, 1, EndMark.CIRCLE, EndMark.CIRCLE))
        graph.set_edge(_edge(1, 2, EndMark.HEAD, EndMark.HEAD))

        assert napds_t(graph, N[1], N[0]) == {N[2]}
        assert apds_t(graph, N[1], N[0]) == set()

    def test_napds_t_empty_neighborhood(self) -> None:
        """b adjacent to a only has no candidates."""
        graph = WindowGraph(2, 0)
        graph.set_edge(_edge(0, 1, EndMark.CIRCLE, EndMark.CIRCLE))

        assert napds_t(graph, N[1], N[0]) == set()

    def test_napds_t_drops_spouse_with_head_from_a(self) -> None:
        """A spouse with an arrowhead on its edge with a cannot start a path."""
        graph = WindowGraph(3, 0)
        graph.set_edge(_edge(0, 1, EndMark.CIRCLE, EndMark.CIRCLE))
        graph.set_edge(_edge(1, 2, EndMark.HEAD, EndMark.HEAD))
        graph.set_edge(_edge(0, 2, EndMark.CIRCLE, EndMark.HEAD))

        assert N[2] not in napds_t(graph, N[1], N[0])

    def test_napds_t_drops_spouse_after_a(self) -> None:
        """A spouse later in time than a is left out."""
        graph = WindowGraph(3, 1)
        graph.set_edge(Edge(NodeRef(0, 1), NodeRef(1, 0), EndMark.CIRCLE, EndMark.CIRCLE))
        graph.set_edge(Edge(NodeRef(1, 0), NodeRef(2, 0), EndMark.HEAD, EndMark.HEAD))

        assert NodeRef(2, 0) not in napds_t(graph, NodeRef(1, 0), NodeRef(0, 1))

    def test_pds_t_follows_colliders(self) -> None:
        """Paths continue through colliders and stop at non-colliders."""
        graph = WindowGraph(5, 0)
        graph.set_edge(_edge(0, 1, EndMark.CIRCLE, EndMark.HEAD))
        graph.set_edge(_edge(2, 1, EndMark.CIRCLE, EndMark.HEAD))
        graph.set_edge(_edge(2, 3, EndMark.CIRCLE, EndMark.CIRCLE))

        assert pds_t(graph, N[0], N[4]) == {N[1], N[2]}

    def test_pds_t_excludes_the_other_endpoint(self) -> None:
        """a never belongs to its own candidate set."""
        graph = WindowGraph(3, 0)
        graph.set_edge(_edge(0, 1, EndMark.CIRCLE, EndMark.HEAD))
        graph.set_edge(_edge(2, 1, EndMark.CIRCLE, EndMark.HEAD))

        assert pds_t(graph, N[0], N[2]) == {N[1]}

    def test_pds_t_drops_future_nodes(self) -> None:
        """Nodes after both endpoints are excluded."""
        graph = WindowGraph(3, 1)
        graph.set_edge(Edge(NodeRef(0, 1), NodeRef(1, 1), EndMark.CIRCLE, EndMark.HEAD))
        graph.set_edge(Edge(NodeRef(2, 0), NodeRef(1, 1), EndMark.CIRCLE, EndMark.HEAD))

        found = pds_t(graph, NodeRef(0, 1), NodeRef(2, 1))

        assert NodeRef(1, 1) in found
        assert NodeRef(2, 0) not in found

    def test_known_ancestors_follow_tails(self) -> None:
        """Chains of directed edges are ancestors; circle marks are not."""
        graph = WindowGraph(4, 0)
        graph.set_edge(_edge(0, 1, EndMark.TAIL, EndMark.HEAD))
        graph.set_edge(_edge(1, 2, EndMark.TAIL, EndMark.HEAD))
        graph.set_edge(_edge(3, 2, EndMark.CIRCLE, EndMark.HEAD))

        assert known_ancestors(graph, [N[2]]) == {N[0], N[1]}

    def test_order_by_imin(self) -> None:
        """Untested pairs come first, then descending I^min."""
        imin = {(0, 0, 1): 0.1, (0, 0, 2): 0.5}

        assert order_by_imin([N[1], N[2], N[3]], N[0], imin) == [N[3], N[2], N[1]]


class TestWeakMinimization:
    """Test weak minimization of separating sets."""

    @pytest.fixture
    def stub(self) -> StubCIAdapter:
        stub = StubCIAdapter()
        stub.declare_independent(N[0], N[1], [N[2], N[3]])
        stub.declare_independent(N[0], N[1], [N[2]])
        return stub

    def test_drops_redundant_members(self, stub: StubCIAdapter) -> None:
        """Members whose removal keeps independence are dropped."""
        runner = CIRunner(stub, alpha=0.05)

        result = weakly_minimize({N[2], N[3]}, (N[0], N[1]), [], runner)

        assert result == frozenset({N[2]})

    def test_known_ancestors_are_kept(self, stub: StubCIAdapter) -> None:
        """Protected members stay even when redundant."""
        runner = CIRunner(stub, alpha=0.05)

        result = weakly_minimize({N[2], N[3]}, (N[0], N[1]), [N[3]], runner)

        assert result == frozenset({N[2], N[3]})

    def test_non_separating_input_raises(self, stub: StubCIAdapter) -> None:
        """The input set must separate the pair."""
        runner = CIRunner(stub, alpha=0.05)

        with pytest.raises(NotSeparatingError, match="does not separate"):
            weakly_minimize({N[3]}, (N[0], N[1]), [], runner)


class TestVoters:
    """Test separating-set membership votes on the triple 0 - 1 - 2."""

    @pytest.fixture
    def state(self) -> DiscoveryState:
        return DiscoveryState(_circle_square(), DiscoveryConfig(tau_max=0))

    def test_adjacency_majority_counts_subsets(self, state: DiscoveryState) -> None:
        """The vote is taken over separating subsets of the adjacencies."""
        stub = StubCIAdapter()
        stub.declare_independent(N[0], N[2], [N[1]])
        stub.declare_independent(N[0], N[2], [N[1], N[3]])
        voter = AdjacencyMajorityVoter(state, CIRunner(stub, alpha=0.05))

        assert voter.vote(N[0], N[2], N[1]) == Vote.IN
        assert voter.contains(N[0], N[1], N[2])

    def test_adjacency_majority_tie_is_ambiguous(self, state: DiscoveryState) -> None:
        """One set with b and one without is a tie."""
        stub = StubCIAdapter()
        stub.declare_independent(N[0], N[2], [N[3]])
        stub.declare_independent(N[0], N[2], [N[1], N[3]])
        voter = AdjacencyMajorityVoter(state, CIRunner(stub, alpha=0.05))

        assert voter.vote(N[0], N[2], N[1]) == Vote.AMBIGUOUS

    def test_adjacency_majority_ignores_recorded_sets(self, state: DiscoveryState) -> None:
        """Without a separating subset among the adjacencies the triple is ambiguous."""
        state.sepsets.add(N[0], N[2], set())
        voter = AdjacencyMajorityVoter(state, CIRunner(StubCIAdapter(), alpha=0.05))

        assert voter.vote(N[0], N[2], N[1]) == Vote.AMBIGUOUS

    def test_modified_majority_pools_recorded_and_searched(self, state: DiscoveryState) -> None:
        """Recorded sets and searched subsets of apds_t vote together."""
        stub = StubCIAdapter()
        stub.declare_independent(N[0], N[2], [N[1]])
        stub.declare_independent(N[0], N[2], [N[1], N[3]])
        state.sepsets.add(N[0], N[2], {N[3]})
        voter = ModifiedMajorityVoter(state, CIRunner(stub, alpha=0.05))

        assert voter.vote(N[0], N[2], N[1]) == Vote.IN
        assert sepset_vote(N[0], N[2], N[1], state, CIRunner(stub, alpha=0.05)) == Vote.IN

    def test_modified_majority_contains_needs_empty_middle_marks(
        self, state: DiscoveryState
    ) -> None:
        """Without empty middle marks only the recorded sets decide membership."""
        stub = StubCIAdapter()
        stub.declare_independent(N[0], N[2], [N[1]])
        stub.declare_independent(N[0], N[2], [N[1], N[3]])
        state.sepsets.add(N[0], N[2], {N[3]})
        for u, v in ((0, 1), (1, 2)):
            state.graph.set_middle(N[u], N[v], MiddleMark.EMPTY)
        voter = ModifiedMajorityVoter(state, CIRunner(stub, alpha=0.05))

        assert voter.contains(N[0], N[1], N[2])

        state.graph.set_middle(N[0], N[1], MiddleMark.UNKNOWN)

        assert not voter.contains(N[0], N[1], N[2])

    def test_modified_majority_without_sets_raises(self, state: DiscoveryState) -> None:
        """No recorded and no found set is a lookup error."""
        voter = ModifiedMajorityVoter(state, CIRunner(StubCIAdapter(), alpha=0.05))

        with pytest.raises(SepSetLookupError):
            voter.vote(N[0], N[2], N[1])

    def test_recorded_sets_voter(self, state: DiscoveryState) -> None:
        """All, none or some recorded sets holding b."""
        state.sepsets.add(N[0], N[2], {N[1]})
        voter = RecordedSetsVoter(state)
        assert voter.vote(N[0], N[2], N[1]) == Vote.IN
        assert voter.vote(N[0], N[2], N[3]) == Vote.NOT_IN

        state.sepsets.add(N[0], N[2], {N[3]})
        assert voter.vote(N[0], N[2], N[1]) == Vote.AMBIGUOUS


class TestShiftedSepsets:
    """Separating sets of a time-shifted pair that leave the window."""

    @pytest.fixture
    def state(self) -> DiscoveryState:
        state = DiscoveryState(WindowGraph(3, 1), DiscoveryConfig(tau_max=1))
        state.sepsets.add(NodeRef(0, 0), NodeRef(2, 0), {NodeRef(1, 1)})
        return state

    def test_store_is_bound_to_the_window(self, state: DiscoveryState) -> None:
        """The shifted copy of the set would need X1(t-2) and is left out."""
        assert state.sepsets.tau_max == 1
        assert state.sepsets.get(NodeRef(0, 0), NodeRef(2, 0)) == [frozenset({NodeRef(1, 1)})]
        assert state.sepsets.get(NodeRef(0, 1), NodeRef(2, 1)) == []

    def test_recorded_sets_voter_is_ambiguous(self, state: DiscoveryState) -> None:
        """A separated pair without in-window sets neither holds nor excludes b."""
        voter = RecordedSetsVoter(state)

        assert voter.vote(NodeRef(0, 1), NodeRef(2, 1), NodeRef(1, 1)) == Vote.AMBIGUOUS
        assert not voter.contains(NodeRef(0, 1), NodeRef(1, 1), NodeRef(2, 1))

    def test_modified_majority_is_ambiguous(self, state: DiscoveryState) -> None:
        """The searching voter finds nothing in an empty graph and falls back the same way."""
        voter = ModifiedMajorityVoter(state, CIRunner(StubCIAdapter(), alpha=0.05))

        assert voter.vote(NodeRef(0, 1), NodeRef(2, 1), NodeRef(1, 1)) == Vote.AMBIGUOUS


class TestNapdsCoversDSep:
    """napds_t holds D-Sep on true MAGs for mutually non-ancestral pairs."""

    def test_superset_on_random_mags(self) -> None:
        """Collider paths avoiding a inside an({a, b}) end in napds_t(b, a)."""
        n_pairs = 0
        for model in random_check_models(50, seed=19):
            oracle = TimeSeriesOracle.from_model(model, tau_max=1)
            mag = oracle.mag
            for b in (node for node in mag.nodes() if node.lag == 0):
                for a in mag.nodes():
                    if a == b or mag.is_adjacent(a, b):
                        continue
                    if oracle.is_ancestor(a, b) or oracle.is_ancestor(b, a):
                        continue
                    ancestral = oracle.observed_ancestors(a) | oracle.observed_ancestors(b)
                    dsep = d_sep_set(mag, b, a, ancestral - {a})

                    assert dsep <= napds_t(mag, b, a), (model.graph.links, a, b)
                    n_pairs += 1

        assert n_pairs > 0
