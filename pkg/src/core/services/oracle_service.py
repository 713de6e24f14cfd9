"""TimeSeriesOracle - Exact ground-truth machinery for a generating model.

This service provides:
1. Ancestor sets and d-separation on the unrolled time series DAG
2. Latent projection to the adjacency-stationarized MAG over the observed window
3. The true time series PAG (FCI rules with time order and repeating orientations)
4. D-Sep sets of the MAG for the separating-set property checks

Observed-level queries use NodeRef(var, lag) with var indexing the observed
variables; the oracle maps them onto the model's variable indices.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from collections.abc import Iterable

import networkx as nx

from src.core.domain.graph import Edge, EndMark, NodeRef, WindowGraph
from src.core.domain.ground_truth import GroundTruthGraph, GroundTruthModel
from src.core.services import fci_rules

logger = logging.getLogger(__name__)

MAX_DOUBLINGS = 10


class WindowConvergenceError(RuntimeError):
    """Raised when d-separation verdicts keep changing as the window grows."""

    def __init__(self, doublings: int, window: int) -> None:
        self.doublings = doublings
        self.window = window
        super().__init__(
            f"d-separation verdict did not converge after {doublings} window doublings "
            f"(window length {window})"
        )


class UnrolledGraph:
    """The time series DAG unrolled over lags 0..window_len.

    Nodes are NodeRef(var, lag) over all model variables, latent ones included.
    Every link (i, tau, j) appears at every shift that fits the window.

    Attributes:
        base: Structure being unrolled
        window_len: Largest lag present
    """

    def __init__(self, base: GroundTruthGraph, window_len: int) -> None:
        if window_len < 0:
            raise ValueError(f"window_len must be non-negative. Got: {window_len}")
        self.base = base
        self.window_len = window_len
        self._ancestors: dict[NodeRef, frozenset[NodeRef]] = {}
        self.dag: nx.DiGraph = nx.DiGraph()
        self.dag.add_nodes_from(
            NodeRef(v, lag) for lag in range(window_len + 1) for v in range(base.n_vars_total)
        )
        for i, tau, j in base.links:
            for lag in range(window_len - tau + 1):
                self.dag.add_edge(NodeRef(i, lag + tau), NodeRef(j, lag))

    def contains(self, node: NodeRef) -> bool:
        return node.var < self.base.n_vars_total and node.lag <= self.window_len

    def ancestors(self, node: NodeRef) -> set[NodeRef]:
        if node not in self._ancestors:
            self._ancestors[node] = frozenset(nx.ancestors(self.dag, node)) | {node}
        return set(self._ancestors[node])

    def d_separated(self, a: NodeRef, b: NodeRef, s: Iterable[NodeRef]) -> bool:
        """d-separation, decided on the ancestral subgraph of {a, b} and s."""
        cond = set(s)
        relevant: set[NodeRef] = set()
        for node in (a, b, *cond):
            relevant |= self.ancestors(node)
        return bool(nx.is_d_separator(self.dag.subgraph(relevant), {a}, {b}, cond))


def _shift_to_present(
    a: NodeRef, b: NodeRef, s: Iterable[NodeRef]
) -> tuple[NodeRef, NodeRef, frozenset[NodeRef]]:
    """Shift a query so its latest node sits at lag 0, with the endpoints ordered.

    d-separation on the unrolled series is invariant under time shifts.
    """
    cond = list(s)
    shift = min(node.lag for node in (a, b, *cond))
    x, y = sorted((a.shift(-shift), b.shift(-shift)), key=lambda n: (n.lag, n.var))
    return x, y, frozenset(node.shift(-shift) for node in cond)


def ancestors(u: UnrolledGraph, node: NodeRef) -> set[NodeRef]:
    """Reflexive-transitive ancestors of node inside the unrolled window.

    Raises:
        ValueError: If node lies outside the window
    """
    if not u.contains(node):
        raise ValueError(f"{node} lies outside the unrolled window of length {u.window_len}")
    return u.ancestors(node)


def d_separated(u: UnrolledGraph, a: NodeRef, b: NodeRef, s: Iterable[NodeRef]) -> bool:
    """d-separation verdict for a and b given s on a fixed unrolled window.

    Raises:
        ValueError: If a == b, a or b is in s, or a node lies outside the window
    """
    cond = set(s)
    if a == b:
        raise ValueError(f"d-separation needs two distinct nodes. Got: {a}")
    if a in cond or b in cond:
        raise ValueError(f"Conditioning set must not contain {a} or {b}")
    for node in (a, b, *cond):
        if not u.contains(node):
            raise ValueError(f"{node} lies outside the unrolled window of length {u.window_len}")
    return u.d_separated(a, b, cond)


class TimeSeriesOracle:
    """Ground truth queries at the level of observed window nodes.

    Attributes:
        truth: Generating structure
        tau_max: Window of the analysis
        initial_window: First unrolling length tried for d-separation
    """

    def __init__(self, truth: GroundTruthGraph, tau_max: int) -> None:
        if tau_max < 0:
            raise ValueError(f"tau_max must be non-negative. Got: {tau_max}")
        self.truth = truth
        self.tau_max = tau_max
        self.initial_window = tau_max + (truth.n_vars_total + 1) * (truth.p_ts + 1)
        self._unrolled: dict[int, UnrolledGraph] = {}
        self._ancestor_cache: dict[NodeRef, frozenset[NodeRef]] = {}
        self._dsep_cache: dict[tuple[NodeRef, NodeRef, frozenset[NodeRef]], bool] = {}
        self._mag: WindowGraph | None = None

    @classmethod
    def from_model(cls, model: GroundTruthModel, tau_max: int) -> TimeSeriesOracle:
        return cls(model.graph, tau_max)

    @property
    def n_observed(self) -> int:
        return self.truth.n_observed

    def to_model_node(self, node: NodeRef) -> NodeRef:
        """Map an observed-index node onto the model's variable index."""
        if node.var >= self.n_observed:
            raise ValueError(f"Observed variable {node.var} out of range 0..{self.n_observed - 1}")
        return NodeRef(self.truth.observed[node.var], node.lag)

    def unrolled(self, window: int) -> UnrolledGraph:
        if window not in self._unrolled:
            logger.debug("Unrolling ground truth over %d lags", window)
            self._unrolled[window] = UnrolledGraph(self.truth, window)
        return self._unrolled[window]

    # ------------------------------------------------------------------
    # Ancestry
    # ------------------------------------------------------------------

    def is_ancestor(self, a: NodeRef, b: NodeRef) -> bool:
        """True if observed node a is an ancestor of observed node b (reflexive)."""
        return a in self.observed_ancestors(b)

    def observed_ancestors(self, node: NodeRef) -> frozenset[NodeRef]:
        """Observed ancestors of node, in observed indices, at any lag.

        A directed path only moves forward in time, so a window reaching back to
        the node's own lag already holds every ancestor at lags up to tau_max.
        """
        if node not in self._ancestor_cache:
            unrolled = self.unrolled(max(self.initial_window, node.lag))
            index = {var: k for k, var in enumerate(self.truth.observed)}
            found = ancestors(unrolled, self.to_model_node(node))
            self._ancestor_cache[node] = frozenset(
                NodeRef(index[anc.var], anc.lag) for anc in found if anc.var in index
            )
        return self._ancestor_cache[node]

    # ------------------------------------------------------------------
    # d-separation with adaptive window
    # ------------------------------------------------------------------

    def d_separated(self, a: NodeRef, b: NodeRef, s: Iterable[NodeRef]) -> bool:
        """d-separation of observed nodes on the conceptually infinite DAG.

        The unrolled window is doubled until two consecutive verdicts agree. A
        d-connecting path found in a truncated window also exists in the full
        graph, so a "connected" verdict is final at once.

        Raises:
            WindowConvergenceError: If MAX_DOUBLINGS doublings do not settle the verdict
        """
        x, y, cond = _shift_to_present(
            self.to_model_node(a), self.to_model_node(b), [self.to_model_node(n) for n in s]
        )
        key = (x, y, cond)
        if key not in self._dsep_cache:
            self._dsep_cache[key] = self._converged_verdict(x, y, cond)
        return self._dsep_cache[key]

    def _converged_verdict(self, x: NodeRef, y: NodeRef, cond: frozenset[NodeRef]) -> bool:
        max_lag = max(node.lag for node in (x, y, *cond))
        window = self.initial_window + max(0, max_lag - self.tau_max)
        previous: bool | None = None
        for _ in range(MAX_DOUBLINGS + 1):
            verdict = d_separated(self.unrolled(window), x, y, cond)
            if not verdict:
                return False
            if previous is not None and previous == verdict:
                return verdict
            previous = verdict
            window *= 2
        raise WindowConvergenceError(MAX_DOUBLINGS, window)

    # ------------------------------------------------------------------
    # MAG, PAG and D-Sep sets
    # ------------------------------------------------------------------

    @property
    def mag(self) -> WindowGraph:
        """The adjacency-stationarized MAG over the observed window (cached)."""
        if self._mag is None:
            self._mag = self.latent_project()
        return self._mag

    def latent_project(self, exhaustive: bool = False) -> WindowGraph:
        """Project the ground truth onto the observed window.

        Each homologous pair is decided at the shift where the later node sits at
        lag 0, which leaves the most observed past for separation. A pair that is
        separable there is non-adjacent at every shift.

        Args:
            exhaustive: Search all observed subsets instead of the ancestral set
        """
        mag = WindowGraph(self.n_observed, self.tau_max)
        window_nodes = mag.nodes()
        for i, tau, j in mag.all_slot_keys():
            a, b = NodeRef(i, tau), NodeRef(j, 0)
            if self._separable(a, b, window_nodes, exhaustive):
                continue
            if self.is_ancestor(a, b):
                marks = (EndMark.TAIL, EndMark.HEAD)
            elif self.is_ancestor(b, a):
                marks = (EndMark.HEAD, EndMark.TAIL)
            else:
                marks = (EndMark.HEAD, EndMark.HEAD)
            mag.set_edge(Edge(a, b, *marks))
        logger.debug("Latent projection: %d homologous adjacencies", len(mag))
        return mag

    def _separable(
        self, a: NodeRef, b: NodeRef, window_nodes: list[NodeRef], exhaustive: bool
    ) -> bool:
        if not exhaustive:
            ancestral = (self.observed_ancestors(a) | self.observed_ancestors(b)) - {a, b}
            cond = {node for node in ancestral if node.lag <= self.tau_max}
            return self.d_separated(a, b, cond)
        others = [node for node in window_nodes if node not in (a, b)]
        for size in range(len(others) + 1):
            for subset in itertools.combinations(others, size):
                if self.d_separated(a, b, subset):
                    return True
        return False

    def true_pag(self) -> WindowGraph:
        """P(G) for this window: FCI rules on the MAG with time order and stationarity."""
        return fci_rules.orient_pag(self.mag)

    def d_sep_set(self, b: NodeRef, a: NodeRef) -> set[NodeRef]:
        """D-Sep(b, a) in the MAG: nodes reached from b by collider paths inside an({a, b}).

        The node a itself is left out, it can never be part of a separating set.
        """
        return d_sep_set(self.mag, b, a, self.observed_ancestors(a) | self.observed_ancestors(b))


def d_sep_set(
    mag: WindowGraph, b: NodeRef, a: NodeRef, ancestral: Iterable[NodeRef]
) -> set[NodeRef]:
    """D-Sep(b, a, mag) given the ancestor set an({a, b}) of the MAG.

    Collider-path reachability is searched over (previous, current) edge states;
    a walk with colliders at every interior node can always be shortened to a
    path with the same property.
    """
    allowed = set(ancestral)
    if b not in allowed:
        return set()
    found: set[NodeRef] = set()
    queue: deque[tuple[NodeRef, NodeRef]] = deque()
    seen: set[tuple[NodeRef, NodeRef]] = set()
    for v in mag.neighbors(b):
        if v in allowed:
            found.add(v)
            queue.append((b, v))
            seen.add((b, v))
    while queue:
        prev, cur = queue.popleft()
        if mag.mark(cur, prev) != EndMark.HEAD:
            continue
        for nxt in mag.neighbors(cur):
            if nxt == prev or nxt == b or nxt not in allowed or (cur, nxt) in seen:
                continue
            if mag.mark(cur, nxt) != EndMark.HEAD:
                continue
            seen.add((cur, nxt))
            found.add(nxt)
            queue.append((cur, nxt))
    found.discard(a)
    found.discard(b)
    return found


def latent_project(truth: GroundTruthGraph, tau_max: int, exhaustive: bool = False) -> WindowGraph:
    """The adjacency-stationarized MAG of truth over lags 0..tau_max."""
    return TimeSeriesOracle(truth, tau_max).latent_project(exhaustive=exhaustive)


def true_pag(truth: GroundTruthGraph, tau_max: int) -> WindowGraph:
    """The time series PAG of truth over lags 0..tau_max."""
    return TimeSeriesOracle(truth, tau_max).true_pag()
