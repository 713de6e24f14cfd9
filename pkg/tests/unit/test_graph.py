"""Unit tests for the window graph domain objects."""

import pytest

from src.core.domain.graph import (
    Edge,
    EndMark,
    LinkClass,
    MiddleMark,
    NodeRef,
    TimeOrderError,
    WindowGraph,
    canonical_key,
    combine_middle_marks,
    link_class,
    node_less,
)


class TestNodeRef:
    """Test NodeRef ordering and invariants."""

    def test_negative_lag_raises(self) -> None:
        """Negative lags should raise ValueError."""
        with pytest.raises(ValueError, match="lag must be non-negative"):
            NodeRef(0, -1)

    def test_negative_var_raises(self) -> None:
        """Negative variable indices should raise ValueError."""
        with pytest.raises(ValueError, match="var must be non-negative"):
            NodeRef(-1, 0)

    def test_earlier_node_is_smaller(self) -> None:
        """Nodes at larger lags come first; ties break on the variable index."""
        assert node_less(NodeRef(3, 2), NodeRef(0, 1))
        assert node_less(NodeRef(0, 1), NodeRef(1, 1))
        assert not node_less(NodeRef(1, 0), NodeRef(0, 0))

    def test_str(self) -> None:
        """String form names the lag only when non-zero."""
        assert str(NodeRef(2, 0)) == "X2(t)"
        assert str(NodeRef(2, 3)) == "X2(t-3)"


class TestLinkClass:
    """Test link classification of canonical keys."""

    @pytest.mark.parametrize(
        "key,expected",
        [
            ((0, 1, 0), LinkClass.AUTO),
            ((0, 2, 1), LinkClass.LAGGED),
            ((0, 0, 1), LinkClass.CONTEMPORANEOUS),
        ],
    )
    def test_classes(self, key: tuple[int, int, int], expected: LinkClass) -> None:
        """Auto, lagged and contemporaneous links are told apart."""
        assert link_class(*key) == expected


class TestCanonicalKey:
    """Test the mapping of node pairs onto homologous slots."""

    def test_time_shifted_pairs_share_a_slot(self) -> None:
        """Time-shifted copies of a pair resolve to one key."""
        key_now, shift_now, _ = canonical_key(NodeRef(0, 1), NodeRef(1, 0))
        key_past, shift_past, _ = canonical_key(NodeRef(1, 2), NodeRef(0, 3))

        assert key_now == key_past == (0, 1, 1)
        assert shift_now == 0
        assert shift_past == 2

    def test_contemporaneous_keys_are_ordered(self) -> None:
        """Contemporaneous pairs are keyed with i < j."""
        key, _, u_is_i = canonical_key(NodeRef(2, 0), NodeRef(1, 0))

        assert key == (1, 0, 2)
        assert u_is_i is False

    def test_self_pair_raises(self) -> None:
        """A node cannot be paired with itself."""
        with pytest.raises(ValueError, match="Self-edges"):
            canonical_key(NodeRef(1, 1), NodeRef(1, 1))


class TestMiddleMarks:
    """Test combination of middle mark information."""

    def test_left_and_right_give_bang(self) -> None:
        """L and R together certify both directions."""
        assert combine_middle_marks(MiddleMark.LEFT, MiddleMark.RIGHT) == MiddleMark.BANG

    def test_unknown_is_neutral(self) -> None:
        """'?' never overrides other information."""
        assert combine_middle_marks(MiddleMark.LEFT, MiddleMark.UNKNOWN) == MiddleMark.LEFT
        assert combine_middle_marks(MiddleMark.UNKNOWN, MiddleMark.RIGHT) == MiddleMark.RIGHT

    def test_empty_absorbs(self) -> None:
        """Empty stays empty."""
        assert combine_middle_marks(MiddleMark.EMPTY, MiddleMark.LEFT) == MiddleMark.EMPTY
        assert combine_middle_marks(MiddleMark.BANG, MiddleMark.EMPTY) == MiddleMark.EMPTY


class TestWindowGraph:
    """Test WindowGraph storage and queries."""

    def test_complete_graph_initial_marks(self) -> None:
        """Lagged links start as o-L->, contemporaneous links as o-?-o."""
        graph = WindowGraph.complete(2, 1)

        assert graph.slot((0, 1, 1)) == (EndMark.CIRCLE, EndMark.HEAD, MiddleMark.LEFT)
        assert graph.slot((0, 1, 0)) == (EndMark.CIRCLE, EndMark.HEAD, MiddleMark.LEFT)
        assert graph.slot((0, 0, 1)) == (EndMark.CIRCLE, EndMark.CIRCLE, MiddleMark.UNKNOWN)

    def test_slot_count(self) -> None:
        """A complete window has N(N-1)/2 + tau_max N^2 slots."""
        graph = WindowGraph.complete(3, 2)

        assert len(graph) == 3 + 2 * 9
        assert len(graph.all_slot_keys()) == len(graph)

    def test_homologous_edges_change_together(self) -> None:
        """Updating one copy of an edge updates every time-shifted copy."""
        graph = WindowGraph.complete(2, 2)
        graph.set_mark(NodeRef(0, 1), NodeRef(1, 1), EndMark.TAIL)

        assert graph.mark(NodeRef(0, 0), NodeRef(1, 0)) == EndMark.TAIL
        assert graph.mark(NodeRef(0, 2), NodeRef(1, 2)) == EndMark.TAIL

    def test_get_edge_is_viewed_from_first_argument(self) -> None:
        """get_edge returns marks relative to the queried order."""
        graph = WindowGraph(2, 1)
        graph.set_edge(Edge(NodeRef(0, 1), NodeRef(1, 0), EndMark.TAIL, EndMark.HEAD))

        forward = graph.get_edge(NodeRef(0, 1), NodeRef(1, 0))
        backward = graph.get_edge(NodeRef(1, 0), NodeRef(0, 1))

        assert forward is not None and backward is not None
        assert forward.mark_at_a == EndMark.TAIL
        assert backward.mark_at_a == EndMark.HEAD

    def test_tail_at_later_node_raises(self) -> None:
        """Lagged edges cannot point back in time."""
        graph = WindowGraph(2, 1)
        with pytest.raises(TimeOrderError):
            graph.set_edge(Edge(NodeRef(0, 1), NodeRef(1, 0), EndMark.HEAD, EndMark.TAIL))

    def test_edge_outside_window_raises(self) -> None:
        """Endpoints beyond tau_max are rejected."""
        graph = WindowGraph(2, 1)
        with pytest.raises(ValueError, match="outside the window"):
            graph.set_edge(Edge(NodeRef(0, 2), NodeRef(1, 0), EndMark.CIRCLE, EndMark.HEAD))

    def test_remove_edge(self) -> None:
        """Removing one copy removes the slot."""
        graph = WindowGraph.complete(2, 1)
        graph.remove_edge(NodeRef(1, 1), NodeRef(0, 0))

        assert not graph.has_slot((1, 1, 0))
        assert not graph.is_adjacent(NodeRef(1, 1), NodeRef(0, 0))

    def test_neighbors_include_homologous_copies(self) -> None:
        """Neighbours of a lagged node include edges shifted into the window."""
        graph = WindowGraph(2, 2)
        graph.set_edge(Edge(NodeRef(0, 1), NodeRef(1, 0), EndMark.TAIL, EndMark.HEAD))

        assert graph.neighbors(NodeRef(1, 0)) == [NodeRef(0, 1)]
        assert graph.neighbors(NodeRef(0, 1)) == [NodeRef(1, 0)]
        assert graph.neighbors(NodeRef(1, 1)) == [NodeRef(0, 2)]

    def test_parents(self) -> None:
        """Parents are the tails of directed edges into the node."""
        graph = WindowGraph(3, 1)
        graph.set_edge(Edge(NodeRef(0, 1), NodeRef(1, 0), EndMark.TAIL, EndMark.HEAD))
        graph.set_edge(Edge(NodeRef(2, 0), NodeRef(1, 0), EndMark.HEAD, EndMark.HEAD))

        assert graph.parents(NodeRef(1, 0)) == {NodeRef(0, 1)}

    def test_update_middle_combines(self) -> None:
        """update_middle returns the combined mark."""
        graph = WindowGraph.complete(2, 0)
        graph.update_middle(NodeRef(0, 0), NodeRef(1, 0), MiddleMark.LEFT)
        combined = graph.update_middle(NodeRef(0, 0), NodeRef(1, 0), MiddleMark.RIGHT)

        assert combined == MiddleMark.BANG
        assert graph.middle(NodeRef(1, 0), NodeRef(0, 0)) == MiddleMark.BANG

    def test_equality_ignores_insertion_order(self) -> None:
        """Graphs with the same slots are equal."""
        first = WindowGraph(3, 0)
        second = WindowGraph(3, 0)
        e1 = Edge(NodeRef(0, 0), NodeRef(1, 0), EndMark.TAIL, EndMark.HEAD)
        e2 = Edge(NodeRef(1, 0), NodeRef(2, 0), EndMark.HEAD, EndMark.HEAD)
        first.set_edge(e1)
        first.set_edge(e2)
        second.set_edge(e2)
        second.set_edge(e1)

        assert first == second
        assert first.diff(second) == []


class TestPermute:
    """Test relabelling of variables."""

    def test_permute_moves_marks(self) -> None:
        """Variable v becomes perm[v] with its marks."""
        graph = WindowGraph(3, 1)
        graph.set_edge(Edge(NodeRef(0, 1), NodeRef(2, 0), EndMark.TAIL, EndMark.HEAD))

        permuted = graph.permute([2, 0, 1])

        assert permuted.slot((2, 1, 1)) == (EndMark.TAIL, EndMark.HEAD, MiddleMark.EMPTY)
        assert len(permuted) == 1

    def test_flipped_contemporaneous_pair_mirrors_marks(self) -> None:
        """A pair whose order flips keeps its meaning: L becomes R, ends swap."""
        graph = WindowGraph(2, 0)
        graph.set_edge(
            Edge(NodeRef(0, 0), NodeRef(1, 0), EndMark.TAIL, EndMark.HEAD, MiddleMark.LEFT)
        )

        permuted = graph.permute([1, 0])

        assert permuted.slot((0, 0, 1)) == (EndMark.HEAD, EndMark.TAIL, MiddleMark.RIGHT)

    def test_permute_twice_with_inverse_is_identity(self) -> None:
        """Permuting with perm and then its inverse restores the graph."""
        graph = WindowGraph.complete(3, 1)
        graph.set_middle(NodeRef(0, 0), NodeRef(2, 0), MiddleMark.RIGHT)
        perm = [1, 2, 0]
        inverse = [perm.index(v) for v in range(3)]

        assert graph.permute(perm).permute(inverse) == graph

    def test_invalid_permutation_raises(self) -> None:
        """Non-permutations are rejected."""
        with pytest.raises(ValueError, match="permutation"):
            WindowGraph(3, 0).permute([0, 0, 1])


class TestGraphSerialization:
    """Test the Graph JSON format."""

    def test_from_dict_reads_middle_marks(self) -> None:
        """Edges with and without middle marks are parsed."""
        graph = WindowGraph.from_dict(
            {
                "n_vars": 2,
                "tau_max": 1,
                "edges": [
                    {"i": 0, "tau": 1, "j": 1, "mark_i": "circle", "mark_j": "head", "middle": "L"},
                    {"i": 0, "tau": 0, "j": 1, "mark_i": "head", "mark_j": "head"},
                ],
            }
        )

        assert graph.slot((0, 1, 1)) == (EndMark.CIRCLE, EndMark.HEAD, MiddleMark.LEFT)
        assert graph.slot((0, 0, 1)) == (EndMark.HEAD, EndMark.HEAD, MiddleMark.EMPTY)
        assert WindowGraph.from_dict(graph.to_dict()) == graph

    def test_missing_field_raises(self) -> None:
        """Missing fields raise ValueError naming the field."""
        with pytest.raises(ValueError, match="missing field"):
            WindowGraph.from_dict({"n_vars": 2})

    def test_unknown_mark_raises(self) -> None:
        """Unknown end marks are rejected."""
        with pytest.raises(ValueError):
            WindowGraph.from_dict(
                {
                    "n_vars": 2,
                    "tau_max": 0,
                    "edges": [{"i": 0, "tau": 0, "j": 1, "mark_i": "arrow", "mark_j": "head"}],
                }
            )

    def test_summary_counts_by_class(self) -> None:
        """summary groups edge symbols by link class."""
        graph = WindowGraph.complete(2, 1)
        summary = graph.summary()

        assert summary["contemporaneous"] == {"o-?-o": 1}
        assert summary["auto"] == {"o-L->": 2}
        assert summary["lagged"] == {"o-L->": 2}
