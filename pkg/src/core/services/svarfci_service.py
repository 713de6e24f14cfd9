"""SVAR-FCI and SVAR-RFCI - FCI-type baselines with time order and stationarity.

Both start with a PC-stable style skeleton phase over adjacency subsets of the
two endpoints. SVAR-FCI then orients colliders, runs a second removal phase
over pds_t sets, resets all orientations and applies the FCI rules.
SVAR-RFCI skips the second removal phase and uses the RFCI collider and
discriminating path rules, which test along the way.

Homologous edges share one slot of the window graph, so every removal and
orientation applies to all time-shifted copies.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable

from src.core.domain.discovery_config import DiscoveryConfig, RuleId
from src.core.domain.discovery_state import DiscoveryState
from src.core.domain.graph import (
    Edge,
    EndMark,
    MiddleMark,
    NodeRef,
    WindowGraph,
    is_future_of_both,
    node_sort_key,
)
from src.core.ports.ci_port import CITestPort
from src.core.ports.trace_port import TracePort
from src.core.services.orientation_rules import OrientationPolicy, VoterFactory, orientation_phase
from src.core.services.separation import (
    AdjacencyMajorityVoter,
    CIRunner,
    RecordedSetsVoter,
    SepsetVoter,
    pds_t,
    subsets,
)

logger = logging.getLogger(__name__)

Candidates = dict[tuple[NodeRef, NodeRef], tuple[list[NodeRef], list[NodeRef]]]

FCI_RULES: tuple[RuleId, ...] = (
    RuleId.ER0D,
    RuleId.ER1,
    RuleId.ER2,
    RuleId.ER3,
    RuleId.R4,
    RuleId.ER8,
    RuleId.ER9,
    RuleId.ER10,
)

RFCI_RULES: tuple[RuleId, ...] = (
    RuleId.ER0A,
    RuleId.ER1,
    RuleId.ER2,
    RuleId.ER3,
    RuleId.ER4,
    RuleId.ER8,
    RuleId.ER9,
    RuleId.ER10,
)


def _recorded_sets_voter(state: DiscoveryState, runner: CIRunner) -> SepsetVoter:
    return RecordedSetsVoter(state)


def voter_factory(sepset_rule: str) -> VoterFactory:
    """Voter for the baselines: "standard" reads the recorded sets, "majority" votes."""
    if sepset_rule == "standard":
        return _recorded_sets_voter
    if sepset_rule == "majority":
        return AdjacencyMajorityVoter
    raise ValueError(f"Unknown sepset rule: {sepset_rule}")


def unoriented_graph(graph: WindowGraph) -> WindowGraph:
    """Same adjacencies with circles everywhere except heads at later nodes of lagged edges."""
    result = WindowGraph(graph.n_vars, graph.tau_max)
    for edge in graph.edges():
        mark_at_b = EndMark.HEAD if edge.is_lagged else EndMark.CIRCLE
        result.set_edge(Edge(edge.a, edge.b, EndMark.CIRCLE, mark_at_b, MiddleMark.EMPTY))
    return result


def initial_state(n_vars: int, config: DiscoveryConfig) -> DiscoveryState:
    complete = WindowGraph.complete(n_vars, config.tau_max)
    return DiscoveryState(unoriented_graph(complete), config)


def _non_future(nodes: Iterable[NodeRef], a: NodeRef, b: NodeRef) -> set[NodeRef]:
    return {node for node in nodes if node not in (a, b) and not is_future_of_both(node, a, b)}


def _removal_round(
    state: DiscoveryState,
    runner: CIRunner,
    candidates: Candidates,
    p: int,
    phase: str,
) -> int:
    """Test every pair given p-subsets of its two candidate lists; remove afterwards."""
    marked: list[tuple[NodeRef, NodeRef]] = []
    for (a, b), (near_b, near_a) in candidates.items():
        separated = False
        for pool in (near_b, near_a):
            if len(pool) < p or separated:
                continue
            for subset in subsets(pool, p):
                if runner.test(a, b, subset, phase, state.sepsets).independent:
                    state.sepsets.add(a, b, subset)
                    separated = True
                    break
        if separated:
            marked.append((a, b))
    for a, b in marked:
        state.graph.remove_edge(a, b)
    return len(marked)


def skeleton_phase(state: DiscoveryState, runner: CIRunner) -> DiscoveryState:
    """Remove edges separable by subsets of the adjacencies of either endpoint.

    Adjacencies are frozen at the start of each level p, so the result does not
    depend on the order in which pairs are visited.
    """
    graph = state.graph
    p = 0
    while True:
        candidates: Candidates = {}
        for edge in graph.edges():
            a, b = edge.a, edge.b
            near_b = sorted(_non_future(graph.neighbors(b), a, b), key=node_sort_key)
            near_a = sorted(_non_future(graph.neighbors(a), a, b), key=node_sort_key)
            if max(len(near_b), len(near_a)) >= p:
                candidates[(a, b)] = (near_b, near_a)
        if not candidates:
            break
        removed = _removal_round(state, runner, candidates, p, "skeleton")
        logger.debug("Skeleton level p=%d removed %d edges", p, removed)
        p += 1
    logger.info("Skeleton phase done: %d edges left", len(graph))
    return state


def pds_phase(state: DiscoveryState, runner: CIRunner) -> DiscoveryState:
    """Second removal phase over pds_t sets, capped at max_cond_nonancestral."""
    graph = state.graph
    cap = state.config.max_cond_nonancestral
    candidates: Candidates = {}
    for edge in graph.edges():
        a, b = edge.a, edge.b
        candidates[(a, b)] = (
            sorted(pds_t(graph, b, a), key=node_sort_key),
            sorted(pds_t(graph, a, b), key=node_sort_key),
        )
    largest = max((max(len(x), len(y)) for x, y in candidates.values()), default=-1)
    if cap is not None and largest > cap:
        logger.warning("pds_t sets of size %d capped at %d", largest, cap)
        largest = cap
    for p in range(largest + 1):
        remaining = {pair: pools for pair, pools in candidates.items() if graph.is_adjacent(*pair)}
        removed = _removal_round(state, runner, remaining, p, "pds")
        logger.debug("pds_t level p=%d removed %d edges", p, removed)
    logger.info("pds_t phase done: %d edges left", len(graph))
    return state


def run_svarfci(
    ci: CITestPort,
    n_vars: int,
    config: DiscoveryConfig,
    trace: TracePort | None = None,
) -> WindowGraph:
    """SVAR-FCI with the separating-set rule of config.sepset_rule."""
    runner = CIRunner(ci, config.alpha, trace)
    policy = OrientationPolicy(voter_factory=voter_factory(config.sepset_rule))
    state = initial_state(n_vars, config)

    # Step 1: skeleton
    skeleton_phase(state, runner)

    # Step 2: colliders, then Possible-D-Sep removals
    orientation_phase(state, (RuleId.ER0D,), runner, policy)
    pds_phase(state, runner)

    # Step 3: reset and orient with the complete rule set
    state.graph = unoriented_graph(state.graph)
    orientation_phase(state, FCI_RULES, runner, policy)
    return state.graph


def run_svarrfci(
    ci: CITestPort,
    n_vars: int,
    config: DiscoveryConfig,
    trace: TracePort | None = None,
) -> WindowGraph:
    """SVAR-RFCI: skeleton, then RFCI orientation with tests along the way."""
    runner = CIRunner(ci, config.alpha, trace)
    policy = OrientationPolicy(
        minimize_sepsets=False,
        rfci_tests=True,
        voter_factory=voter_factory(config.sepset_rule),
    )
    state = initial_state(n_vars, config)
    skeleton_phase(state, runner)
    orientation_phase(state, RFCI_RULES, runner, policy)
    return state.graph
