"""LPCMCI - Latent PCMCI for autocorrelated time series with latent confounders.

This module runs:
1. The preliminary phase: k ancestral removal phases, each followed by a
   re-initialization that carries the parentships found over as -?->
2. One final ancestral removal phase
3. The non-ancestral removal phase (optional, on by default)

Edges are tested pair class by pair class: autodependencies first, then cross
links by increasing lag. Removals are deferred to the end of each class, and
every conditioning set is extended by the known parents of both endpoints.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

from src.core.domain.discovery_config import DiscoveryConfig
from src.core.domain.discovery_state import DiscoveryState
from src.core.domain.graph import MiddleMark, NodeRef, WindowGraph
from src.core.ports.ci_port import CITestPort
from src.core.ports.trace_port import TracePort
from src.core.services.orientation_rules import OrientationPolicy, orientation_phase
from src.core.services.separation import (
    CIRunner,
    apds_t,
    napds_t,
    order_by_imin,
    subsets,
)

logger = logging.getLogger(__name__)

# Called with a step name after every removal round and orientation phase
StepObserver = Callable[[str, DiscoveryState], None]

ANCESTRAL_DONE = frozenset({MiddleMark.BANG, MiddleMark.EMPTY})
NONANCESTRAL_DONE = frozenset({MiddleMark.EMPTY})

Pair = tuple[NodeRef, NodeRef]


def _notify(observer: StepObserver | None, step: str, state: DiscoveryState) -> None:
    if observer is not None:
        observer(step, state)


def _in_sweep(edge_vars: tuple[int, int, int], m: int) -> bool:
    """Autodependencies for m = -1, cross links at lag m otherwise."""
    i, tau, j = edge_vars
    if m == -1:
        return i == j
    return i != j and tau == m


def _update_middle(
    state: DiscoveryState, runner: CIRunner, a: NodeRef, b: NodeRef, info: MiddleMark, phase: str
) -> None:
    before = state.graph.middle(a, b)
    if state.graph.update_middle(a, b, info) != before:
        runner.emit(phase, a, b, "middle")


def _exhaust_middles(state: DiscoveryState, runner: CIRunner, info: MiddleMark, phase: str) -> int:
    changed = 0
    for edge in list(state.graph.edges()):
        if edge.middle not in (info, MiddleMark.EMPTY):
            _update_middle(state, runner, edge.a, edge.b, info, phase)
            changed += 1
    return changed


def _search_and_record(
    state: DiscoveryState,
    runner: CIRunner,
    pair: Pair,
    search: list[NodeRef],
    s_def: set[NodeRef],
    p: int,
    phase: str,
) -> bool:
    """Test the pair given every p-subset of search plus s_def; record the first separating set."""
    a, b = pair
    for subset in subsets(search, p):
        cond = set(subset) | s_def
        if runner.test(a, b, cond, phase, state.sepsets).independent:
            state.sepsets.add(a, b, cond)
            return True
    return False


# =============================================================================
# Ancestral removal
# =============================================================================


def _ancestral_sweep(state: DiscoveryState, runner: CIRunner, m: int, p: int) -> list[Pair]:
    graph = state.graph
    imin = state.sepsets.imin_snapshot()
    marked: list[Pair] = []
    for edge in list(graph.edges()):
        a, b = edge.a, edge.b
        if not _in_sweep((a.var, a.lag, b.var), m):
            continue
        s_def = state.default_conditions(a, b)
        separated = False
        directions = (
            (b, a, MiddleMark.RIGHT, (MiddleMark.UNKNOWN, MiddleMark.LEFT)),
            (a, b, MiddleMark.LEFT, (MiddleMark.UNKNOWN, MiddleMark.RIGHT)),
        )
        for anchor, other, info, searched_when in directions:
            if graph.middle(a, b) not in searched_when:
                continue
            search = order_by_imin(apds_t(graph, anchor, other) - s_def, anchor, imin)
            if len(search) < p:
                _update_middle(state, runner, a, b, info, "ancestral")
                continue
            if _search_and_record(state, runner, (a, b), search, s_def, p, "ancestral"):
                separated = True
        if separated:
            marked.append((a, b))
    return marked


def ancestral_removal(
    state: DiscoveryState, runner: CIRunner, observer: StepObserver | None = None
) -> DiscoveryState:
    """Remove edges between pairs where one node is an ancestor of the other.

    Loops over conditioning-set sizes p until only '!' and empty middle marks
    remain; any removal triggers the lagged-only orientation rules and restarts
    at p = 0. Ends with the full rule list.
    """
    config = state.config
    lagged_policy = OrientationPolicy(lagged_only=True)
    p = 0
    while not state.middle_marks_only(set(ANCESTRAL_DONE)):
        if config.max_cond_ancestral is not None and p > config.max_cond_ancestral:
            n = _exhaust_middles(state, runner, MiddleMark.BANG, "ancestral")
            logger.warning(
                "Ancestral phase reached the conditioning cap %d; %d middle marks set to '!'",
                config.max_cond_ancestral,
                n,
            )
            break
        removed = 0
        for m in range(-1, config.tau_max + 1):
            marked = _ancestral_sweep(state, runner, m, p)
            for a, b in marked:
                state.graph.remove_edge(a, b)
            removed += len(marked)
        _notify(observer, "ancestral removal", state)
        if removed:
            logger.debug("Ancestral phase p=%d removed %d edges", p, removed)
            orientation_phase(state, config.lagged_rules, runner, lagged_policy)
            _notify(observer, "ancestral orientation", state)
            p = 0
        else:
            p += 1
    orientation_phase(state, config.final_rules, runner)
    _notify(observer, "ancestral final orientation", state)
    logger.info("Ancestral phase done: %d edges left", len(state.graph))
    return state


# =============================================================================
# Non-ancestral removal
# =============================================================================


def _nonancestral_sweep(state: DiscoveryState, runner: CIRunner, m: int, p: int) -> list[Pair]:
    graph = state.graph
    imin = state.sepsets.imin_snapshot()
    marked: list[Pair] = []
    for edge in list(graph.edges()):
        a, b = edge.a, edge.b
        if edge.middle == MiddleMark.EMPTY or not _in_sweep((a.var, a.lag, b.var), m):
            continue
        s1_def = state.default_conditions(a, b)
        s2_def = (state.ever_parents(a) | state.ever_parents(b)) - {a, b}
        napds_b = napds_t(graph, b, a)
        napds_a = napds_t(graph, a, b)
        s1_search = order_by_imin(napds_b - s1_def - s2_def, b, imin)
        s2_search = order_by_imin(napds_a - s1_def - s2_def, a, imin)
        contemporaneous = a.lag == b.lag

        # Contemporaneous pairs are only settled once both sides are exhausted
        exhausted_1 = len(s1_search) < p
        exhausted_2 = len(s2_search) < p
        if exhausted_1 and (not contemporaneous or exhausted_2):
            _update_middle(state, runner, a, b, MiddleMark.EMPTY, "nonancestral")
            continue

        sides = [(s1_search, napds_b)]
        if contemporaneous:
            sides.append((s2_search, napds_a))
        separated = False
        for search, napds in sides:
            if len(search) < p:
                continue
            s_def = s1_def | (s2_def & napds)
            if _search_and_record(state, runner, (a, b), search, s_def, p, "nonancestral"):
                separated = True
        if separated:
            marked.append((a, b))
    return marked


def nonancestral_removal(
    state: DiscoveryState, runner: CIRunner, observer: StepObserver | None = None
) -> DiscoveryState:
    """Remove the remaining false links between mutually non-ancestral pairs.

    Expects every middle mark to be '!' or empty. Searches napds_t sets, with
    ever-known parents in the default conditions, until all middle marks are
    empty; any removal triggers the full rule list and restarts at p = 0.
    """
    config = state.config
    p = 0
    while not state.middle_marks_only(set(NONANCESTRAL_DONE)):
        if config.max_cond_nonancestral is not None and p > config.max_cond_nonancestral:
            n = _exhaust_middles(state, runner, MiddleMark.EMPTY, "nonancestral")
            logger.warning(
                "Non-ancestral phase reached the conditioning cap %d; %d middle marks emptied",
                config.max_cond_nonancestral,
                n,
            )
            break
        removed = 0
        for m in range(-1, config.tau_max + 1):
            marked = _nonancestral_sweep(state, runner, m, p)
            for a, b in marked:
                state.graph.remove_edge(a, b)
            removed += len(marked)
        _notify(observer, "nonancestral removal", state)
        if removed:
            logger.debug("Non-ancestral phase p=%d removed %d edges", p, removed)
            orientation_phase(state, config.final_rules, runner)
            _notify(observer, "nonancestral orientation", state)
            p = 0
        else:
            p += 1
    orientation_phase(state, config.final_rules, runner)
    _notify(observer, "nonancestral final orientation", state)
    logger.info("Non-ancestral phase done: %d edges left", len(state.graph))
    return state


# =============================================================================
# Full run
# =============================================================================


def lpcmci(
    state: DiscoveryState, runner: CIRunner, observer: StepObserver | None = None
) -> DiscoveryState:
    """Run LPCMCI on an initial state; returns the same state, finished."""
    config = state.config
    for iteration in range(config.k):
        logger.info("Preliminary ancestral iteration %d of %d", iteration + 1, config.k)
        ancestral_removal(state, runner, observer)
        carried = state.reinitialize(carry_parents=True)
        logger.info("Re-initialized with %d carried parent links", carried)
        _notify(observer, "reinitialize", state)
    logger.info("Final ancestral phase")
    ancestral_removal(state, runner, observer)
    if config.run_nonancestral:
        logger.info("Non-ancestral phase")
        nonancestral_removal(state, runner, observer)
    else:
        logger.info(
            "Non-ancestral phase skipped; middle marks left: %s",
            sorted(mark.value for mark in state.graph.middle_marks()),
        )
    return state


def run_lpcmci(
    ci: CITestPort,
    n_vars: int,
    config: DiscoveryConfig,
    trace: TracePort | None = None,
    observer: StepObserver | None = None,
) -> WindowGraph:
    """Estimate the time series PAG of N variables over lags 0..tau_max.

    Raises:
        CIQueryError: If a CI test fails for any reason other than degeneracy
    """
    runner = CIRunner(ci, config.alpha, trace)
    state = lpcmci(DiscoveryState.initial(n_vars, config), runner, observer)
    return state.graph
