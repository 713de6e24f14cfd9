"""Unit tests for graph scoring and the Metrics domain object."""

import pytest

from src.core.domain.graph import Edge, EndMark, LinkClass, NodeRef, WindowGraph
from src.core.domain.metrics import ClassCounts, Metrics, ratio
from src.core.services.scoring import compare_graphs, true_link_type


def _truth() -> WindowGraph:
    """X0 autodependent, X0 <-> X1 contemporaneous."""
    truth = WindowGraph(2, 1)
    truth.set_edge(Edge(NodeRef(0, 1), NodeRef(0, 0), EndMark.TAIL, EndMark.HEAD))
    truth.set_edge(Edge(NodeRef(0, 0), NodeRef(1, 0), EndMark.HEAD, EndMark.HEAD))
    return truth


def _estimate() -> WindowGraph:
    estimate = WindowGraph(2, 1)
    estimate.set_edge(Edge(NodeRef(0, 1), NodeRef(0, 0), EndMark.CIRCLE, EndMark.HEAD))
    estimate.set_edge(Edge(NodeRef(0, 0), NodeRef(1, 0), EndMark.HEAD, EndMark.TAIL))
    estimate.set_edge(Edge(NodeRef(0, 1), NodeRef(1, 0), EndMark.CIRCLE, EndMark.HEAD))
    return estimate


class TestCompareGraphs:
    """Test counts per link class."""

    def test_counts_per_class(self) -> None:
        """Adjacencies per canonical pair, marks only where determined."""
        metrics = compare_graphs(_estimate(), _truth())

        assert metrics.classes[LinkClass.AUTO] == ClassCounts(1, 1, 1, 0, 2, 1, 1, 1)
        assert metrics.classes[LinkClass.CONTEMPORANEOUS] == ClassCounts(1, 1, 0, 0, 2, 1, 2, 1)
        assert metrics.classes[LinkClass.LAGGED] == ClassCounts(0, 0, 2, 1, 0, 0, 1, 0)
        assert metrics.true_link_types == {"directed": 1, "bidirected": 1, "unoriented": 0}

    def test_rates(self) -> None:
        """Rates follow from the counts; empty denominators take the vacuous value."""
        lagged = compare_graphs(_estimate(), _truth()).classes[LinkClass.LAGGED]

        assert lagged.tpr == 1.0
        assert lagged.fpr == 0.5
        assert lagged.edgemark_recall == 1.0
        assert lagged.edgemark_precision == 0.0
        assert lagged.zero_counts == ["tpr", "edgemark_recall"]

    def test_effect_size_averages_true_links(self) -> None:
        """Only true links enter the mean of |I^min|."""
        imin = {(0, 1, 0): 0.3, (0, 0, 1): -0.1, (0, 1, 1): 0.9}

        metrics = compare_graphs(_estimate(), _truth(), imin)

        assert metrics.effect_sizes == [pytest.approx(0.2)]

    def test_conflict_marks_are_wrong(self) -> None:
        """A conflict mark is estimated, wrong and misses the true mark."""
        estimate = WindowGraph(2, 1)
        estimate.set_edge(Edge(NodeRef(0, 0), NodeRef(1, 0), EndMark.CONFLICT, EndMark.HEAD))

        counts = compare_graphs(estimate, _truth()).classes[LinkClass.CONTEMPORANEOUS]

        assert (counts.true_marks, counts.recalled_marks) == (2, 1)
        assert (counts.estimated_marks, counts.correct_marks) == (2, 1)

    def test_perfect_estimate(self) -> None:
        """Comparing the truth with itself gives perfect scores."""
        metrics = compare_graphs(_truth(), _truth())

        for counts in metrics.classes.values():
            assert counts.tpr == 1.0
            assert counts.fpr == 0.0
            assert counts.edgemark_recall == 1.0
            assert counts.edgemark_precision == 1.0

    def test_different_windows_raise(self) -> None:
        """Both graphs must share n_vars and tau_max."""
        with pytest.raises(ValueError, match="different windows"):
            compare_graphs(WindowGraph(2, 2), _truth())

    def test_true_link_type(self) -> None:
        """Circles make a link unoriented, two heads bidirected."""
        assert true_link_type(EndMark.CIRCLE, EndMark.HEAD) == "unoriented"
        assert true_link_type(EndMark.HEAD, EndMark.HEAD) == "bidirected"
        assert true_link_type(EndMark.TAIL, EndMark.HEAD) == "directed"


class TestClassCounts:
    """Test count invariants."""

    def test_hits_cannot_exceed_totals(self) -> None:
        """detected <= true_adjacent."""
        with pytest.raises(ValueError, match="detected"):
            ClassCounts(true_adjacent=1, detected=2)

    def test_negative_counts_raise(self) -> None:
        """Counts are non-negative."""
        with pytest.raises(ValueError, match="non-negative"):
            ClassCounts(true_absent=-1)

    def test_addition_pools_counts(self) -> None:
        """Rates of a sum come from pooled counts, not averaged rates."""
        total = ClassCounts(true_adjacent=1, detected=1) + ClassCounts(true_adjacent=3, detected=0)

        assert total.tpr == 0.25

    def test_ratio(self) -> None:
        """The vacuous value stands in for an empty denominator."""
        assert ratio(1, 4, 0.0) == 0.25
        assert ratio(0, 0, 1.0) == 1.0


class TestMetrics:
    """Test pooling and serialization."""

    def _run(self, runtime: float, n_tests: int) -> Metrics:
        metrics = compare_graphs(_estimate(), _truth())
        return Metrics(
            classes=metrics.classes,
            runtimes=[runtime],
            n_tests=[n_tests],
            max_cardinalities=[1],
            true_link_types=metrics.true_link_types,
        )

    def test_pooling_is_order_independent(self) -> None:
        """combine is commutative on counts."""
        a, b = self._run(1.0, 10), self._run(3.0, 20)

        ab, ba = Metrics.pooled([a, b]), Metrics.pooled([b, a])

        assert ab.classes == ba.classes
        assert ab.n_runs == 2
        assert ab.to_dict()["mean_n_tests"] == 15.0

    def test_empty_pool(self) -> None:
        """No runs means zero runs and no timing."""
        pooled = Metrics.pooled([])

        assert pooled.n_runs == 0
        assert pooled.runtime_summary() == {"mean": None, "low": None, "high": None}

    def test_round_trip(self) -> None:
        """to_dict parses back into equal metrics."""
        metrics = Metrics.pooled([self._run(1.0, 10), self._run(2.0, 12)])

        assert Metrics.from_dict(metrics.to_dict()) == metrics

    def test_runtime_summary(self) -> None:
        """Mean with the 5th and 95th percentiles."""
        metrics = Metrics(runtimes=[1.0, 2.0, 3.0], n_runs=3)

        summary = metrics.runtime_summary()

        assert summary["mean"] == 2.0
        assert summary["low"] == pytest.approx(1.1)
        assert summary["high"] == pytest.approx(2.9)

    def test_missing_class_raises(self) -> None:
        """Every link class needs counts."""
        with pytest.raises(ValueError, match="lack link classes"):
            Metrics(classes={LinkClass.AUTO: ClassCounts()})

    def test_too_many_entries_raise(self) -> None:
        """Per-run lists cannot outgrow n_runs."""
        with pytest.raises(ValueError, match="more entries"):
            Metrics(runtimes=[1.0, 2.0], n_runs=1)
