"""Separation helpers for the removal phases and the orientation rules.

This module provides:
1. CIRunner: CI test invocation with I^min bookkeeping, tracing and error context
2. apds_t / napds_t / pds_t conditioning-set candidates
3. Weak minimization of separating sets
4. Separating-set membership votes (modified majority, adjacency majority, recorded sets)
"""

from __future__ import annotations

import itertools
import logging
import math
from abc import ABC, abstractmethod
from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Protocol

from src.core.domain.graph import (
    EndMark,
    MiddleMark,
    NodeRef,
    SlotKey,
    WindowGraph,
    canonical_key,
    is_future_of_both,
    node_sort_key,
)
from src.core.domain.sepsets import SepSetLookupError, SepSetStore
from src.core.ports.ci_port import CIQuery, CIQueryError, CITestError, DegenerateTestError
from src.core.ports.trace_port import TraceRecord

if TYPE_CHECKING:
    from src.core.domain.discovery_state import DiscoveryState
    from src.core.ports.ci_port import CITestPort
    from src.core.ports.trace_port import TracePort

logger = logging.getLogger(__name__)


class NotSeparatingError(ValueError):
    """Raised when a set handed to weak minimization does not separate the pair."""

    def __init__(self, pair: tuple[NodeRef, NodeRef], sepset: Iterable[NodeRef]) -> None:
        self.pair = pair
        self.sepset = frozenset(sepset)
        members = ", ".join(str(n) for n in sorted(self.sepset, key=node_sort_key))
        super().__init__(f"{{{members}}} does not separate {pair[0]} and {pair[1]}")


class Vote(str, Enum):
    """Answer to "is B in the separating set of A and C?"."""

    IN = "in"
    NOT_IN = "not_in"
    AMBIGUOUS = "ambiguous"


# =============================================================================
# CI test invocation
# =============================================================================


@dataclass(frozen=True)
class TestOutcome:
    """Verdict of one CI test inside a run.

    Attributes:
        independent: p-value above alpha
        p_value: p-value (0 for degenerate tests)
        statistic: Absolute statistic (inf for degenerate tests)
        degenerate: The test gave no verdict and was treated as dependent
    """

    __test__ = False

    independent: bool
    p_value: float
    statistic: float
    degenerate: bool = False


class CIRunner:
    """Runs CI tests for a discovery run.

    Degenerate tests count as dependence and are logged. Any other CI failure
    is re-raised as CIQueryError naming the query.

    Attributes:
        ci: Test behind the runner
        alpha: Significance level
        trace: Optional trace sink
        n_degenerate: Number of degenerate tests seen
    """

    def __init__(self, ci: CITestPort, alpha: float, trace: TracePort | None = None) -> None:
        self.ci = ci
        self.alpha = alpha
        self.trace = trace
        self.n_degenerate = 0

    def test(
        self,
        x: NodeRef,
        y: NodeRef,
        cond: Iterable[NodeRef],
        phase: str,
        sepsets: SepSetStore | None = None,
    ) -> TestOutcome:
        """Test x _||_ y | cond; with sepsets given, update I^min of the pair."""
        query = CIQuery(x, y, frozenset(cond))
        try:
            result = self.ci.run_test(query)
        except DegenerateTestError as e:
            self.n_degenerate += 1
            logger.warning("%s; treated as dependent", e)
            self.emit(phase, x, y, "degenerate", query.cond)
            return TestOutcome(False, 0.0, math.inf, degenerate=True)
        except CIQueryError:
            raise
        except CITestError as e:
            raise CIQueryError(query, e) from e

        if sepsets is not None:
            sepsets.update_imin(x, y, abs(result.statistic))
        independent = result.p_value > self.alpha
        logger.debug(
            "%s %s: p=%.4g stat=%.4g", phase, query, result.p_value, abs(result.statistic)
        )
        self.emit(
            phase,
            x,
            y,
            "removed" if independent else "kept",
            query.cond,
            result.p_value,
            abs(result.statistic),
        )
        return TestOutcome(independent, result.p_value, abs(result.statistic))

    def emit(
        self,
        phase: str,
        x: NodeRef,
        y: NodeRef,
        action: str,
        cond: frozenset[NodeRef] = frozenset(),
        p_value: float | None = None,
        statistic: float | None = None,
    ) -> None:
        if self.trace is not None:
            self.trace.record(TraceRecord(phase, x, y, cond, p_value, statistic, action))


# =============================================================================
# Candidate conditioning sets
# =============================================================================


def apds_t(graph: WindowGraph, b: NodeRef, a: NodeRef) -> set[NodeRef]:
    """Window nodes other than a adjacent to b without a head at themselves."""
    return {k for k in graph.neighbors(b) if k != a and graph.mark(k, b) != EndMark.HEAD}


def _tail_at(graph: WindowGraph, at: NodeRef, other: NodeRef) -> bool:
    return graph.is_adjacent(at, other) and graph.mark(at, other) == EndMark.TAIL


def _head_at(graph: WindowGraph, at: NodeRef, other: NodeRef) -> bool:
    return graph.is_adjacent(at, other) and graph.mark(at, other) == EndMark.HEAD


def _interior_allowed(graph: WindowGraph, node: NodeRef, b: NodeRef, a: NodeRef) -> bool:
    if _tail_at(graph, b, node) or _tail_at(graph, a, node):
        return False
    if _head_at(graph, node, b) and _head_at(graph, node, a):
        return False
    return not is_future_of_both(node, b, a)


def napds_t(graph: WindowGraph, b: NodeRef, a: NodeRef) -> set[NodeRef]:
    """Non-ancestral possible D-Sep candidates of b with respect to a.

    The first part is apds_t(b, a) without the nodes that have a tail-marked
    edge at a. The second part holds the nodes reached from b along paths
    without tails (except at the last node) whose unshielded triples are
    colliders, subject to the restrictions on the first node and the later
    nodes. Reachability is searched over (previous, current) edge states, which
    may admit some walks that are not paths; the result is then a superset.

    ER0a must have been applied exhaustively for the superset property of D-Sep.
    """
    part1 = {k for k in apds_t(graph, b, a) if not _tail_at(graph, a, k)}

    part2: set[NodeRef] = set()
    queue: deque[tuple[NodeRef, NodeRef]] = deque()
    seen: set[tuple[NodeRef, NodeRef]] = set()
    for first in graph.neighbors(b):
        if first == a or graph.mark(b, first) == EndMark.TAIL:
            continue
        if _head_at(graph, first, a) or first.lag < a.lag:
            continue
        part2.add(first)
        seen.add((b, first))
        queue.append((b, first))

    while queue:
        prev, cur = queue.popleft()
        if graph.mark(cur, prev) == EndMark.TAIL:
            continue
        for nxt in graph.neighbors(cur):
            if nxt in (prev, a, b) or (cur, nxt) in seen:
                continue
            if graph.mark(cur, nxt) == EndMark.TAIL:
                continue
            unshielded = not graph.is_adjacent(prev, nxt)
            if unshielded and not (
                graph.mark(cur, prev) == EndMark.HEAD and graph.mark(cur, nxt) == EndMark.HEAD
            ):
                continue
            if not _interior_allowed(graph, nxt, b, a):
                continue
            seen.add((cur, nxt))
            part2.add(nxt)
            queue.append((cur, nxt))

    return (part1 | part2) - {a, b}


def pds_t(graph: WindowGraph, b: NodeRef, a: NodeRef) -> set[NodeRef]:
    """Possible-D-Sep of b inside the window, without a and future-of-both nodes.

    A node v is included if some path from b to v has every interior node
    either a collider or the middle of a triangle.
    """
    found: set[NodeRef] = set()
    queue: deque[tuple[NodeRef, NodeRef]] = deque()
    seen: set[tuple[NodeRef, NodeRef]] = set()
    for first in graph.neighbors(b):
        found.add(first)
        seen.add((b, first))
        queue.append((b, first))
    while queue:
        prev, cur = queue.popleft()
        for nxt in graph.neighbors(cur):
            if nxt in (prev, b) or (cur, nxt) in seen:
                continue
            collider = (
                graph.mark(cur, prev) == EndMark.HEAD and graph.mark(cur, nxt) == EndMark.HEAD
            )
            if not (collider or graph.is_adjacent(prev, nxt)):
                continue
            seen.add((cur, nxt))
            found.add(nxt)
            queue.append((cur, nxt))
    return {node for node in found - {a, b} if not is_future_of_both(node, a, b)}


def known_ancestors(graph: WindowGraph, nodes: Iterable[NodeRef]) -> set[NodeRef]:
    """Nodes with a chain of tail-marked edges into one of the given nodes."""
    targets = set(nodes)
    result: set[NodeRef] = set()
    frontier = list(targets)
    while frontier:
        v = frontier.pop()
        for w in graph.neighbors(v):
            if w in result or w in targets:
                continue
            if graph.mark(w, v) == EndMark.TAIL:
                result.add(w)
                frontier.append(w)
    return result


def order_by_imin(
    candidates: Iterable[NodeRef], anchor: NodeRef, imin: Mapping[SlotKey, float]
) -> list[NodeRef]:
    """Sort candidates by descending I^min(anchor, candidate), ties by lag then slot."""

    def key(node: NodeRef) -> tuple[float, int, SlotKey]:
        slot, _, _ = canonical_key(anchor, node)
        return (-imin.get(slot, math.inf), node.lag, slot)

    return sorted(candidates, key=key)


def subsets(candidates: list[NodeRef], size: int) -> Iterator[tuple[NodeRef, ...]]:
    return itertools.combinations(candidates, size)


# =============================================================================
# Weak minimization
# =============================================================================


def weakly_minimize(
    sepset: Iterable[NodeRef],
    pair: tuple[NodeRef, NodeRef],
    known: Iterable[NodeRef],
    runner: CIRunner,
) -> frozenset[NodeRef]:
    """Drop non-ancestor elements one at a time while the set still separates.

    Each round removes the candidate whose removal keeps the largest p-value;
    elements in `known` are never removed.

    Raises:
        NotSeparatingError: If the input set does not separate the pair
    """
    a, b = pair
    current = set(sepset)
    if not runner.test(a, b, current, "minimize").independent:
        raise NotSeparatingError(pair, current)
    protected = set(known)
    while True:
        best: NodeRef | None = None
        best_p = -1.0
        for node in sorted(current - protected, key=node_sort_key):
            outcome = runner.test(a, b, current - {node}, "minimize")
            if outcome.independent and outcome.p_value > best_p:
                best, best_p = node, outcome.p_value
        if best is None:
            return frozenset(current)
        current.discard(best)


# =============================================================================
# Separating-set membership votes
# =============================================================================


class SepsetVoter(Protocol):
    """Answers membership queries about separating sets of non-adjacent pairs."""

    def vote(self, a: NodeRef, c: NodeRef, b: NodeRef) -> Vote:
        """Query of the form "is b not in the separating set of a and c?"."""
        ...

    def contains(self, a: NodeRef, b: NodeRef, c: NodeRef) -> bool:
        """Query of the form "is b in the separating set of a and c?"."""
        ...


def _count_vote(
    pool: Iterable[frozenset[NodeRef]],
    b: NodeRef,
    a: NodeRef,
    c: NodeRef,
    store: SepSetStore,
) -> Vote:
    sets = list(pool)
    if not sets:
        # Separated pair whose recorded sets all leave the window at this shift
        if store.has(a, c):
            return Vote.AMBIGUOUS
        raise SepSetLookupError(a, c)
    n_in = sum(1 for s in sets if b in s)
    if 2 * n_in < len(sets):
        return Vote.NOT_IN
    if 2 * n_in > len(sets):
        return Vote.IN
    return Vote.AMBIGUOUS


class RecordedSetsVoter:
    """Answers from the recorded separating sets only.

    b is "in" if every recorded set holds it, "not in" if none does.
    """

    def __init__(self, state: DiscoveryState) -> None:
        self.state = state

    def vote(self, a: NodeRef, c: NodeRef, b: NodeRef) -> Vote:
        sets = self.state.sepsets.get(a, c)
        if not sets:
            if self.state.sepsets.has(a, c):
                return Vote.AMBIGUOUS
            raise SepSetLookupError(a, c)
        hits = sum(1 for s in sets if b in s)
        if hits == 0:
            return Vote.NOT_IN
        if hits == len(sets):
            return Vote.IN
        return Vote.AMBIGUOUS

    def contains(self, a: NodeRef, b: NodeRef, c: NodeRef) -> bool:
        return self.vote(a, c, b) == Vote.IN


class _SearchingVoter(ABC):
    """Shared subset search; results are cached for the voter's lifetime."""

    phase = "vote"

    def __init__(self, state: DiscoveryState, runner: CIRunner) -> None:
        self.state = state
        self.runner = runner
        self._found: dict[tuple[NodeRef, NodeRef], frozenset[frozenset[NodeRef]]] = {}

    @abstractmethod
    def _candidates(self, x: NodeRef, y: NodeRef) -> set[NodeRef]: ...

    @abstractmethod
    def _defaults(self, a: NodeRef, c: NodeRef) -> set[NodeRef]: ...

    def _search(self, a: NodeRef, c: NodeRef) -> frozenset[frozenset[NodeRef]]:
        key = (a, c) if node_sort_key(a) <= node_sort_key(c) else (c, a)
        if key in self._found:
            return self._found[key]
        defaults = self._defaults(a, c) - {a, c}
        cap = self.state.config.max_vote_cardinality
        found: set[frozenset[NodeRef]] = set()
        for x, y in ((a, c), (c, a)):
            candidates = sorted(self._candidates(x, y) - defaults - {a, c}, key=node_sort_key)
            largest = len(candidates) if cap is None else min(cap, len(candidates))
            for size in range(largest + 1):
                for subset in subsets(candidates, size):
                    cond = frozenset(subset) | defaults
                    if cond in found:
                        continue
                    if self.runner.test(a, c, cond, self.phase).independent:
                        found.add(cond)
        result = frozenset(found)
        self._found[key] = result
        return result

    def clear(self) -> None:
        self._found.clear()


class ModifiedMajorityVoter(_SearchingVoter):
    """Majority vote over recorded sets plus separating subsets of the apds_t sets.

    Searched sets are extended by the parents of both nodes. "In" queries use
    the vote only when b is joined to a and c by edges with empty middle marks;
    otherwise only the recorded sets count, by strict majority.
    """

    def _candidates(self, x: NodeRef, y: NodeRef) -> set[NodeRef]:
        return apds_t(self.state.graph, y, x)

    def _defaults(self, a: NodeRef, c: NodeRef) -> set[NodeRef]:
        return self.state.default_conditions(a, c)

    def vote(self, a: NodeRef, c: NodeRef, b: NodeRef) -> Vote:
        pool = set(self.state.sepsets.get(a, c)) | self._search(a, c)
        return _count_vote(pool, b, a, c, self.state.sepsets)

    def contains(self, a: NodeRef, b: NodeRef, c: NodeRef) -> bool:
        graph = self.state.graph
        if (
            graph.middle(a, b) == MiddleMark.EMPTY
            and graph.middle(c, b) == MiddleMark.EMPTY
        ):
            return self.vote(a, c, b) == Vote.IN
        return _count_vote(self.state.sepsets.get(a, c), b, a, c, self.state.sepsets) == Vote.IN


class AdjacencyMajorityVoter(_SearchingVoter):
    """Plain majority rule over separating subsets of the adjacencies of a and c.

    Recorded sets never enter the vote. A triple whose endpoints have no
    separating subset among their adjacencies is ambiguous.
    """

    def _candidates(self, x: NodeRef, y: NodeRef) -> set[NodeRef]:
        return {
            k for k in self.state.graph.neighbors(y) if k != x and not is_future_of_both(k, x, y)
        }

    def _defaults(self, a: NodeRef, c: NodeRef) -> set[NodeRef]:
        return set()

    def vote(self, a: NodeRef, c: NodeRef, b: NodeRef) -> Vote:
        pool = self._search(a, c)
        if not pool:
            return Vote.AMBIGUOUS
        return _count_vote(pool, b, a, c, self.state.sepsets)

    def contains(self, a: NodeRef, b: NodeRef, c: NodeRef) -> bool:
        return self.vote(a, c, b) == Vote.IN


def sepset_vote(
    a: NodeRef, c: NodeRef, b: NodeRef, state: DiscoveryState, runner: CIRunner
) -> Vote:
    """Modified majority vote on whether b lies in the separating set of a and c.

    Raises:
        SepSetLookupError: If no separating set is recorded or found
    """
    return ModifiedMajorityVoter(state, runner).vote(a, c, b)
