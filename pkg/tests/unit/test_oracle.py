"""Unit tests for the ground-truth oracle."""

import itertools

import networkx as nx
import pytest

from src.core.domain.graph import Edge, EndMark, NodeRef, WindowGraph
from src.core.domain.ground_truth import GroundTruthGraph, motivational_model
from src.core.services import oracle_service
from src.core.services.oracle_check_service import random_check_models
from src.core.services.oracle_service import (
    TimeSeriesOracle,
    UnrolledGraph,
    WindowConvergenceError,
    ancestors,
    d_sep_set,
    d_separated,
    latent_project,
    true_pag,
)

A, B, C, D = (NodeRef(v, 0) for v in range(4))
X0, Y0, Z0 = NodeRef(0, 0), NodeRef(1, 0), NodeRef(2, 0)
X1, Y1, Z1 = NodeRef(0, 1), NodeRef(1, 1), NodeRef(2, 1)


def _contemporaneous(n_vars: int, *links: tuple[int, int]) -> UnrolledGraph:
    truth = GroundTruthGraph(
        n_vars_total=n_vars,
        links=frozenset((i, 0, j) for i, j in links),
        observed=tuple(range(n_vars)),
    )
    return UnrolledGraph(truth, 0)


class TestUnrolledGraph:
    """Test ancestors and d-separation on a fixed window."""

    def test_ancestors_are_reflexive(self) -> None:
        """An isolated node is its own only ancestor."""
        assert ancestors(_contemporaneous(2), A) == {A}

    def test_ancestors_follow_lagged_links(self) -> None:
        """An AR(1) chain reaches back through the whole window."""
        truth = GroundTruthGraph(n_vars_total=1, links=frozenset({(0, 1, 0)}), observed=(0,))

        found = ancestors(UnrolledGraph(truth, 2), NodeRef(0, 0))

        assert found == {NodeRef(0, 0), NodeRef(0, 1), NodeRef(0, 2)}

    def test_node_outside_window_raises(self) -> None:
        """Queries past the window are rejected."""
        with pytest.raises(ValueError, match="outside the unrolled window"):
            ancestors(_contemporaneous(2), NodeRef(0, 1))

    def test_chain(self) -> None:
        """A -> B -> C is blocked by B."""
        u = _contemporaneous(3, (0, 1), (1, 2))

        assert not d_separated(u, A, C, [])
        assert d_separated(u, A, C, [B])

    def test_collider(self) -> None:
        """A -> C <- B opens when C is conditioned on."""
        u = _contemporaneous(3, (0, 2), (1, 2))

        assert d_separated(u, A, B, [])
        assert not d_separated(u, A, B, [C])

    def test_collider_then_chain(self) -> None:
        """A -> C <- D <- B: conditioning on D closes what C opens."""
        u = _contemporaneous(4, (0, 2), (3, 2), (1, 3))

        assert d_separated(u, A, B, [C, D])
        assert not d_separated(u, A, B, [C])

    def test_invalid_queries_raise(self) -> None:
        """Endpoints must differ and stay out of the conditioning set."""
        u = _contemporaneous(3, (0, 1))

        with pytest.raises(ValueError, match="distinct"):
            d_separated(u, A, A, [])
        with pytest.raises(ValueError, match="must not contain"):
            d_separated(u, A, B, [A])


class TestTimeSeriesOracle:
    """Test observed-level queries on the motivational model."""

    @pytest.fixture
    def oracle(self) -> TimeSeriesOracle:
        return TimeSeriesOracle.from_model(motivational_model(), tau_max=2)

    def test_lagged_ancestor(self, oracle: TimeSeriesOracle) -> None:
        """Y(t-1) drives Z(t); Z never drives Y."""
        assert oracle.is_ancestor(Y1, Z0)
        assert oracle.is_ancestor(Z0, Z0)
        assert not oracle.is_ancestor(Z1, Y0)

    def test_hidden_confounder_connects(self, oracle: TimeSeriesOracle) -> None:
        """X(t) and Y(t) share the latent U(t) and cannot be separated."""
        assert not oracle.d_separated(X0, Y0, [X1, Y1])
        assert not oracle.d_separated(X0, Y0, [])

    def test_parents_of_z_separate(self, oracle: TimeSeriesOracle) -> None:
        """Every path into Z(t) runs through Y(t-1) or Z(t-1)."""
        assert not oracle.d_separated(X1, Z0, [])
        assert oracle.d_separated(X1, Z0, [Y1, Z1])

    def test_unknown_observed_variable_raises(self, oracle: TimeSeriesOracle) -> None:
        """Only observed indices 0..N-1 are valid."""
        with pytest.raises(ValueError, match="out of range"):
            oracle.to_model_node(NodeRef(3, 0))

    def test_mag_marks(self, oracle: TimeSeriesOracle) -> None:
        """Confounded pairs are bidirected, ancestral pairs directed."""
        mag = oracle.mag

        assert (mag.mark(X0, Y0), mag.mark(Y0, X0)) == (EndMark.HEAD, EndMark.HEAD)
        assert (mag.mark(Y1, Z0), mag.mark(Z0, Y1)) == (EndMark.TAIL, EndMark.HEAD)
        assert mag.get_edge(X1, Y0) is None
        assert mag.get_edge(X1, Z0) is None

    def test_projection_searches_agree(self) -> None:
        """The ancestral-set shortcut equals the search over all observed subsets."""
        truth = motivational_model().graph

        assert latent_project(truth, 1) == latent_project(truth, 1, exhaustive=True)

    def test_true_pag_keeps_confounded_pair(self, oracle: TimeSeriesOracle) -> None:
        """The PAG still shows X(t) <-> Y(t) and a head at Z(t)."""
        pag = oracle.true_pag()

        assert (pag.mark(X0, Y0), pag.mark(Y0, X0)) == (EndMark.HEAD, EndMark.HEAD)
        assert pag.mark(Z0, Y1) == EndMark.HEAD
        assert NodeRef(1, 2) not in pag.neighbors(Z0)

    def test_empty_truth_gives_empty_pag(self) -> None:
        """Without links nothing is adjacent."""
        truth = GroundTruthGraph(n_vars_total=2, links=frozenset(), observed=(0, 1))

        assert len(true_pag(truth, 1)) == 0


class TestDSepSet:
    """Test D-Sep sets on hand-built MAGs."""

    def _collider_chain(self, last_mark: EndMark) -> WindowGraph:
        """0 -*> 1 <-> 2 <-> 3, node 4 isolated."""
        mag = WindowGraph(5, 0)
        mag.set_edge(Edge(NodeRef(0, 0), NodeRef(1, 0), last_mark, EndMark.HEAD))
        mag.set_edge(Edge(NodeRef(1, 0), NodeRef(2, 0), EndMark.HEAD, EndMark.HEAD))
        mag.set_edge(Edge(NodeRef(2, 0), NodeRef(3, 0), EndMark.HEAD, EndMark.HEAD))
        return mag

    def test_follows_collider_paths(self) -> None:
        """Every node on a collider path from b is collected."""
        mag = self._collider_chain(EndMark.TAIL)

        found = d_sep_set(mag, NodeRef(3, 0), NodeRef(4, 0), mag.nodes())

        assert found == {NodeRef(0, 0), NodeRef(1, 0), NodeRef(2, 0)}

    def test_stops_at_non_colliders(self) -> None:
        """A tail at 1 on 1 -> 2 ends the collider path at 2."""
        mag = WindowGraph(4, 0)
        mag.set_edge(Edge(NodeRef(0, 0), NodeRef(1, 0), EndMark.HEAD, EndMark.HEAD))
        mag.set_edge(Edge(NodeRef(1, 0), NodeRef(2, 0), EndMark.TAIL, EndMark.HEAD))
        mag.set_edge(Edge(NodeRef(2, 0), NodeRef(3, 0), EndMark.HEAD, EndMark.HEAD))

        found = d_sep_set(mag, NodeRef(3, 0), NodeRef(0, 0), mag.nodes())

        assert found == {NodeRef(2, 0), NodeRef(1, 0)}

    def test_restricted_to_ancestral_set(self) -> None:
        """Nodes outside an({a, b}) are skipped; b outside gives nothing."""
        mag = self._collider_chain(EndMark.TAIL)
        allowed = {NodeRef(3, 0), NodeRef(2, 0), NodeRef(4, 0)}

        assert d_sep_set(mag, NodeRef(3, 0), NodeRef(4, 0), allowed) == {NodeRef(2, 0)}
        assert d_sep_set(mag, NodeRef(3, 0), NodeRef(4, 0), set()) == set()

    def test_isolated_node(self) -> None:
        """A node without adjacencies has an empty D-Sep set."""
        mag = self._collider_chain(EndMark.TAIL)

        assert d_sep_set(mag, NodeRef(4, 0), NodeRef(0, 0), mag.nodes()) == set()

    def test_ancestor_case_equals_parents(self) -> None:
        """When a is an ancestor of b, D-Sep(b, a) is pa(b) in the MAG."""
        oracle = TimeSeriesOracle.from_model(motivational_model(), tau_max=1)

        assert oracle.d_sep_set(Z0, Z1) == oracle.mag.parents(Z0) - {Z1}


class TestWindowDoubling:
    """Test the adaptive window of the observed-level d-separation."""

    @pytest.fixture
    def oracle(self) -> TimeSeriesOracle:
        return TimeSeriesOracle.from_model(motivational_model(), tau_max=2)

    def test_separated_verdict_holds_on_larger_windows(self, oracle: TimeSeriesOracle) -> None:
        """A converged 'separated' verdict does not change when the window keeps growing."""
        assert oracle.d_separated(X1, Z0, [Y1, Z1])

        for factor in (2, 4, 8):
            unrolled = UnrolledGraph(oracle.truth, factor * oracle.initial_window)
            x, z = oracle.to_model_node(X1), oracle.to_model_node(Z0)
            cond = {oracle.to_model_node(Y1), oracle.to_model_node(Z1)}
            assert unrolled.d_separated(x, z, cond)

    def test_separated_verdict_needs_two_windows(self, oracle: TimeSeriesOracle) -> None:
        """The initial window and its double are both unrolled."""
        oracle.d_separated(X1, Z0, [Y1, Z1])

        assert oracle.initial_window in oracle._unrolled
        assert 2 * oracle.initial_window in oracle._unrolled

    def test_connected_verdict_is_final_at_once(self, oracle: TimeSeriesOracle) -> None:
        """A d-connecting path in the first window settles the query."""
        assert not oracle.d_separated(X0, Y0, [])

        assert list(oracle._unrolled) == [oracle.initial_window]

    def test_exhausted_doublings_raise(
        self, oracle: TimeSeriesOracle, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Without a second window a 'separated' verdict cannot be confirmed."""
        monkeypatch.setattr(oracle_service, "MAX_DOUBLINGS", 0)

        with pytest.raises(WindowConvergenceError, match="did not converge") as exc:
            oracle.d_separated(X1, Z0, [Y1, Z1])

        assert exc.value.doublings == 0
        assert exc.value.window == 2 * oracle.initial_window


class TestDSeparationCaching:
    """Test the memoized and ancestral-subgraph d-separation."""

    def test_shifted_queries_share_a_verdict(self) -> None:
        """Time-shifted copies of a query are answered from one cache entry."""
        oracle = TimeSeriesOracle.from_model(motivational_model(), tau_max=2)
        shifted = (NodeRef(0, 2), NodeRef(2, 1), [NodeRef(1, 2), NodeRef(2, 2)])

        first = oracle.d_separated(X1, Z0, [Y1, Z1])
        second = oracle.d_separated(*shifted)

        assert first and second
        assert len(oracle._dsep_cache) == 1

    def test_endpoint_order_shares_a_verdict(self) -> None:
        """d(a, b | S) and d(b, a | S) use the same entry."""
        oracle = TimeSeriesOracle.from_model(motivational_model(), tau_max=2)

        assert oracle.d_separated(Z0, X1, [Y1, Z1]) == oracle.d_separated(X1, Z0, [Z1, Y1])
        assert len(oracle._dsep_cache) == 1

    def test_ancestral_subgraph_agrees_with_full_graph(self) -> None:
        """Restricting to an({a, b} | S) never changes a verdict."""
        for model in random_check_models(3, seed=4):
            unrolled = UnrolledGraph(model.graph, 3)
            nodes = sorted(unrolled.dag.nodes, key=lambda n: (n.lag, n.var))
            for a, b in itertools.combinations(nodes[:6], 2):
                for extra in nodes[6:9]:
                    for cond in (set(), {extra}):
                        full = nx.is_d_separator(unrolled.dag, {a}, {b}, cond)
                        assert unrolled.d_separated(a, b, cond) == full
