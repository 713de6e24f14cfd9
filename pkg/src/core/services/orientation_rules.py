"""Orientation rules for LPCMCI-PAGs and the orientation phase.

Every rule only reads the graph and returns proposals: end marks to set,
middle-mark information to combine, and edges to remove. The orientation
phase applies the proposals of one rule at a time, resolves head/tail clashes
on the same mark into the conflict mark 'x', weak-minimizes the separating
sets of removed edges and restarts at the first rule after any change.

Wildcards: rule antecedents written with "*" accept the conflict mark,
antecedents written with "star" (here: `_not_conflict`) do not.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

from src.core.domain.discovery_config import RuleId
from src.core.domain.discovery_state import DiscoveryState
from src.core.domain.graph import (
    Edge,
    EndMark,
    MiddleMark,
    NodeRef,
    WindowGraph,
    canonical_key,
    is_future_of_both,
    node_less,
)
from src.core.services.graph_paths import (
    discriminating_paths,
    is_directed,
    triples,
    uncovered_pd_paths,
)
from src.core.services.separation import (
    CIRunner,
    ModifiedMajorityVoter,
    SepsetVoter,
    Vote,
    known_ancestors,
    weakly_minimize,
)

logger = logging.getLogger(__name__)

VoterFactory = Callable[[DiscoveryState, CIRunner], SepsetVoter]


# =============================================================================
# Proposals
# =============================================================================


@dataclass(frozen=True)
class MarkProposal:
    """Set the end mark at `at` on the edge at-other."""

    at: NodeRef
    other: NodeRef
    mark: EndMark


@dataclass(frozen=True)
class MiddleProposal:
    """Combine `info` into the middle mark of u-v."""

    u: NodeRef
    v: NodeRef
    info: MiddleMark


@dataclass(frozen=True)
class RemovalProposal:
    """Remove a-b, found independent given sepset."""

    a: NodeRef
    b: NodeRef
    sepset: frozenset[NodeRef]


@dataclass
class Proposals:
    marks: list[MarkProposal] = field(default_factory=list)
    middles: list[MiddleProposal] = field(default_factory=list)
    removals: list[RemovalProposal] = field(default_factory=list)

    def orient(self, at: NodeRef, other: NodeRef, mark: EndMark) -> None:
        self.marks.append(MarkProposal(at, other, mark))

    def directed(self, u: NodeRef, v: NodeRef) -> None:
        """Propose u -> v."""
        self.orient(u, v, EndMark.TAIL)
        self.orient(v, u, EndMark.HEAD)

    def is_empty(self) -> bool:
        return not (self.marks or self.middles or self.removals)


# =============================================================================
# Rule context
# =============================================================================


@dataclass
class RuleContext:
    """Everything a rule may read, plus the test policy.

    Attributes:
        state: Discovery state (read-only for rules)
        runner: CI test runner for ER0a, ER0b and ER4
        voter: Separating-set membership queries, fresh per rule application
        rfci_tests: Test every path edge given the plain separating set (baselines)
    """

    state: DiscoveryState
    runner: CIRunner
    voter: SepsetVoter
    rfci_tests: bool = False

    @property
    def graph(self) -> WindowGraph:
        return self.state.graph

    def dependent_given_sepsets(
        self,
        x: NodeRef,
        y: NodeRef,
        sepsets: Iterable[frozenset[NodeRef]],
        phase: str,
        proposals: Proposals,
    ) -> bool:
        """True if x and y stay dependent given every recorded separating set.

        With LPCMCI tests an empty middle mark already certifies adjacency and
        no test runs; otherwise each set is extended by pa({x, y}). The first
        independence found is proposed as a removal and False is returned.
        """
        if not self.rfci_tests and self.graph.middle(x, y) == MiddleMark.EMPTY:
            return True
        extra = set() if self.rfci_tests else self.state.default_conditions(x, y)
        for sepset in sepsets:
            cond = {
                node
                for node in (set(sepset) | extra) - {x, y}
                if not is_future_of_both(node, x, y)
            }
            if self.runner.test(x, y, cond, phase).independent:
                proposals.removals.append(RemovalProposal(x, y, frozenset(cond)))
                return False
        return True

    def not_in(self, a: NodeRef, b: NodeRef, c: NodeRef) -> bool:
        return self.voter.vote(a, c, b) == Vote.NOT_IN


Rule = Callable[[RuleContext], Proposals]


def _not_conflict(graph: WindowGraph, at: NodeRef, other: NodeRef) -> bool:
    return graph.mark(at, other) != EndMark.CONFLICT


def _exhausted_middle(graph: WindowGraph, b: NodeRef, c: NodeRef) -> bool:
    """b-c carries '!', Empty, R with b < c or L with b > c."""
    middle = graph.middle(b, c)
    if middle in (MiddleMark.BANG, MiddleMark.EMPTY):
        return True
    if middle == MiddleMark.RIGHT:
        return node_less(b, c)
    if middle == MiddleMark.LEFT:
        return node_less(c, b)
    return False


def _circle_to_star(graph: WindowGraph, b: NodeRef, c: NodeRef) -> bool:
    """b o-star c: circle at b, no conflict at c."""
    return graph.mark(b, c) == EndMark.CIRCLE and _not_conflict(graph, c, b)


# =============================================================================
# Collider rules
# =============================================================================


def rule_er0a(ctx: RuleContext) -> Proposals:
    """Unshielded a - b - c: collider at b if both pairs stay dependent and b not in S_ac."""
    graph, out = ctx.graph, Proposals()
    for a, b, c in triples(graph):
        if not node_less(a, c):
            continue
        marks = (graph.mark(b, a), graph.mark(b, c))
        if any(m in (EndMark.TAIL, EndMark.CONFLICT) for m in marks):
            continue
        sepsets = ctx.state.sepsets.get(a, c)
        if not sepsets:
            continue
        ok_ab = ctx.dependent_given_sepsets(a, b, sepsets, "ER0a", out)
        ok_cb = ctx.dependent_given_sepsets(c, b, sepsets, "ER0a", out)
        if ok_ab and ok_cb and ctx.not_in(a, b, c):
            out.orient(b, a, EndMark.HEAD)
            out.orient(b, c, EndMark.HEAD)
    return out


def rule_er0b(ctx: RuleContext) -> Proposals:
    """a *-> b o-star c with an exhausted b-c middle mark: b <-star c."""
    graph, out = ctx.graph, Proposals()
    for a, b, c in triples(graph):
        if graph.mark(b, a) != EndMark.HEAD or not _circle_to_star(graph, b, c):
            continue
        if not _exhausted_middle(graph, b, c):
            continue
        sepsets = ctx.state.sepsets.get(a, c)
        if not sepsets:
            continue
        if not ctx.dependent_given_sepsets(a, b, sepsets, "ER0b", out):
            continue
        if ctx.not_in(a, b, c):
            out.orient(b, c, EndMark.HEAD)
    return out


def rule_er0c(ctx: RuleContext) -> Proposals:
    """a *-* b with empty middle, b o-star c exhausted, b not in S_ac: b <-star c."""
    graph, out = ctx.graph, Proposals()
    for a, b, c in triples(graph):
        if graph.middle(a, b) != MiddleMark.EMPTY or not _circle_to_star(graph, b, c):
            continue
        if not _exhausted_middle(graph, b, c):
            continue
        if ctx.not_in(a, b, c):
            out.orient(b, c, EndMark.HEAD)
    return out


def rule_er0d(ctx: RuleContext) -> Proposals:
    """Standard collider rule on edges with empty middle marks."""
    graph, out = ctx.graph, Proposals()
    for a, b, c in triples(graph):
        if not node_less(a, c):
            continue
        if graph.middle(a, b) != MiddleMark.EMPTY or graph.middle(b, c) != MiddleMark.EMPTY:
            continue
        at_a, at_c = graph.mark(b, a), graph.mark(b, c)
        candidates = (
            (at_a == EndMark.CIRCLE and at_c in (EndMark.CIRCLE, EndMark.HEAD))
            or (at_c == EndMark.CIRCLE and at_a in (EndMark.CIRCLE, EndMark.HEAD))
        )
        if candidates and ctx.not_in(a, b, c):
            out.orient(b, a, EndMark.HEAD)
            out.orient(b, c, EndMark.HEAD)
    return out


# =============================================================================
# Propagation rules
# =============================================================================


def rule_er1(ctx: RuleContext) -> Proposals:
    """a *-> b o-star c unshielded, b in S_ac: b -> c."""
    graph, out = ctx.graph, Proposals()
    for a, b, c in triples(graph):
        if graph.mark(b, a) != EndMark.HEAD or not _circle_to_star(graph, b, c):
            continue
        if ctx.voter.contains(a, b, c):
            out.directed(b, c)
    return out


def rule_er2(ctx: RuleContext) -> Proposals:
    """a -> b *-> c or a *-> b -> c, with a star-o c: a star-> c."""
    graph, out = ctx.graph, Proposals()
    for a in graph.nodes():
        for c in graph.neighbors(a):
            if graph.mark(c, a) != EndMark.CIRCLE or not _not_conflict(graph, a, c):
                continue
            for b in graph.neighbors(a):
                if b == c or not graph.is_adjacent(b, c):
                    continue
                if (is_directed(graph, a, b) and graph.mark(c, b) == EndMark.HEAD) or (
                    graph.mark(b, a) == EndMark.HEAD and is_directed(graph, b, c)
                ):
                    out.orient(c, a, EndMark.HEAD)
                    break
    return out


def rule_er3(ctx: RuleContext) -> Proposals:
    """a *-> b <-* c unshielded, a star-o d o-star c, d star-o b, d in S_ac: d star-> b."""
    graph, out = ctx.graph, Proposals()
    for a, b, c in triples(graph):
        if not node_less(a, c):
            continue
        if graph.mark(b, a) != EndMark.HEAD or graph.mark(b, c) != EndMark.HEAD:
            continue
        for d in graph.neighbors(b):
            if d in (a, c) or not (graph.is_adjacent(d, a) and graph.is_adjacent(d, c)):
                continue
            if not (_circle_to_star(graph, d, a) and _circle_to_star(graph, d, c)):
                continue
            if not _circle_to_star(graph, b, d):
                continue
            if ctx.voter.contains(a, d, c):
                out.orient(b, d, EndMark.HEAD)
    return out


def _discriminating_decision(ctx: RuleContext, x: NodeRef, v: NodeRef, y: NodeRef) -> bool | None:
    """True: v in S_xy; False: v not in S_xy; None: undecided."""
    in_set = ctx.voter.contains(x, v, y)
    not_in = ctx.not_in(x, v, y)
    if in_set and not not_in:
        return True
    if not_in and not in_set:
        return False
    return None


def _orient_discriminated(out: Proposals, w: NodeRef, v: NodeRef, y: NodeRef, in_set: bool) -> None:
    if in_set:
        out.directed(v, y)
    else:
        out.orient(v, w, EndMark.HEAD)
        out.orient(v, y, EndMark.HEAD)
        out.orient(y, v, EndMark.HEAD)


def _empty_middle(edge: Edge) -> bool:
    return (
        edge.middle == MiddleMark.EMPTY
        and EndMark.CONFLICT not in (edge.mark_at_a, edge.mark_at_b)
    )


def rule_r4(ctx: RuleContext) -> Proposals:
    """Discriminating path rule on edges with empty middle marks, without tests."""
    graph, out = ctx.graph, Proposals()
    for v in graph.nodes():
        for y in graph.neighbors(v):
            if graph.mark(v, y) != EndMark.CIRCLE:
                continue
            for path in discriminating_paths(graph, v, y, _empty_middle):
                decision = _discriminating_decision(ctx, path[0], v, y)
                if decision is not None:
                    _orient_discriminated(out, path[-3], v, y, decision)
    return out


def _path_test_pairs(path: list[NodeRef]) -> list[tuple[NodeRef, NodeRef]]:
    """Consecutive pairs up to v plus every collider and v paired with y."""
    y = path[-1]
    pairs = [(path[k], path[k + 1]) for k in range(len(path) - 2)]
    pairs.extend((q, y) for q in path[1:-1])
    return pairs


def rule_er4(ctx: RuleContext) -> Proposals:
    """Discriminating path rule with dependence checks along the path."""
    graph, out = ctx.graph, Proposals()
    for v in graph.nodes():
        for y in graph.neighbors(v):
            if graph.mark(v, y) != EndMark.CIRCLE:
                continue
            for path in discriminating_paths(graph, v, y):
                x = path[0]
                sepsets = ctx.state.sepsets.get(x, y)
                if not sepsets:
                    continue
                intact = all(
                    ctx.dependent_given_sepsets(p, q, sepsets, "ER4", out)
                    for p, q in _path_test_pairs(path)
                )
                if not intact:
                    continue
                decision = _discriminating_decision(ctx, x, v, y)
                if decision is not None:
                    _orient_discriminated(out, path[-3], v, y, decision)
    return out


def rule_er8(ctx: RuleContext) -> Proposals:
    """a -> b -> c with a o-star c: a -> c."""
    graph, out = ctx.graph, Proposals()
    for a in graph.nodes():
        for c in graph.neighbors(a):
            if not _circle_to_star(graph, a, c):
                continue
            if any(
                b != c and is_directed(graph, a, b) and is_directed(graph, b, c)
                for b in graph.neighbors(a)
            ):
                out.directed(a, c)
    return out


def _circle_arrows(graph: WindowGraph) -> list[tuple[NodeRef, NodeRef]]:
    found = []
    for a in graph.nodes():
        for c in graph.neighbors(a):
            if graph.mark(a, c) == EndMark.CIRCLE and graph.mark(c, a) == EndMark.HEAD:
                found.append((a, c))
    return found


def _chain_certified(ctx: RuleContext, path: list[NodeRef], before_start: NodeRef) -> bool:
    """Each step path[k] -> path[k+1] is directed or path[k] is in S(path[k+1], path[k-1]).

    path[-1] of the convention is before_start.
    """
    graph = ctx.graph
    for k in range(len(path) - 1):
        current, following = path[k], path[k + 1]
        if is_directed(graph, current, following):
            continue
        previous = path[k - 1] if k > 0 else before_start
        if not ctx.voter.contains(following, current, previous):
            return False
    return True


def rule_er9(ctx: RuleContext) -> Proposals:
    """a o-> c with an uncovered p.d. path <a, a2, ..., c>, a2 and c non-adjacent: a -> c."""
    graph, out = ctx.graph, Proposals()
    for a, c in _circle_arrows(graph):
        for path in uncovered_pd_paths(graph, a, {c}, extend_targets=False):
            if len(path) < 4 or graph.is_adjacent(path[1], c):
                continue
            if _chain_certified(ctx, path[:-1] + [c], c):
                out.directed(a, c)
                break
    return out


def rule_er10(ctx: RuleContext) -> Proposals:
    """a o-> d, b -> d <- e, certified uncovered p.d. paths from a to b and e: a -> d."""
    graph, out = ctx.graph, Proposals()
    for a, d in _circle_arrows(graph):
        parents = {x for x in graph.neighbors(d) if x != a and is_directed(graph, x, d)}
        if len(parents) < 2:
            continue
        starts: set[tuple[NodeRef, NodeRef]] = set()
        for path in uncovered_pd_paths(graph, a, parents, forbidden={d}):
            if (path[1], path[-1]) in starts:
                continue
            if _chain_certified(ctx, path[1:], a):
                starts.add((path[1], path[-1]))
        if _separated_starts(ctx, a, starts):
            out.directed(a, d)
    return out


def _separated_starts(ctx: RuleContext, a: NodeRef, starts: set[tuple[NodeRef, NodeRef]]) -> bool:
    ordered = sorted(starts, key=lambda s: (s[0].lag, s[0].var, s[1].lag, s[1].var))
    for k, (mu, end_1) in enumerate(ordered):
        for omega, end_2 in ordered[k + 1 :]:
            if end_1 == end_2 or mu == omega or ctx.graph.is_adjacent(mu, omega):
                continue
            if ctx.voter.contains(mu, a, omega):
                return True
    return False


# =============================================================================
# Middle-mark rules
# =============================================================================


def rule_apr(ctx: RuleContext) -> Proposals:
    """Ancestor-parent rule: a -> b with an exhausted middle mark becomes a -> b (empty)."""
    out = Proposals()
    for edge in ctx.graph.edges():
        a, b, middle = edge.a, edge.b, edge.middle
        if edge.mark_at_a == EndMark.TAIL and edge.mark_at_b == EndMark.HEAD:
            if middle in (MiddleMark.BANG, MiddleMark.RIGHT):
                out.middles.append(MiddleProposal(a, b, MiddleMark.EMPTY))
        elif edge.mark_at_a == EndMark.HEAD and edge.mark_at_b == EndMark.TAIL:
            if middle in (MiddleMark.BANG, MiddleMark.LEFT):
                out.middles.append(MiddleProposal(a, b, MiddleMark.EMPTY))
    return out


def rule_mmr(ctx: RuleContext) -> Proposals:
    """Middle-mark rule: a head at the later-ordered node certifies 'L', at the earlier 'R'."""
    out = Proposals()
    for edge in ctx.graph.edges():
        a, b, middle = edge.a, edge.b, edge.middle
        if edge.mark_at_b == EndMark.HEAD and middle in (MiddleMark.UNKNOWN, MiddleMark.RIGHT):
            out.middles.append(MiddleProposal(a, b, MiddleMark.LEFT))
        if edge.mark_at_a == EndMark.HEAD and middle in (MiddleMark.UNKNOWN, MiddleMark.LEFT):
            out.middles.append(MiddleProposal(a, b, MiddleMark.RIGHT))
    return out


RULES: dict[RuleId, Rule] = {
    RuleId.ER0A: rule_er0a,
    RuleId.ER0B: rule_er0b,
    RuleId.ER0C: rule_er0c,
    RuleId.ER0D: rule_er0d,
    RuleId.ER1: rule_er1,
    RuleId.ER2: rule_er2,
    RuleId.ER3: rule_er3,
    RuleId.ER4: rule_er4,
    RuleId.R4: rule_r4,
    RuleId.ER8: rule_er8,
    RuleId.ER9: rule_er9,
    RuleId.ER10: rule_er10,
    RuleId.APR: rule_apr,
    RuleId.MMR: rule_mmr,
}


# =============================================================================
# Application
# =============================================================================


def resolve_mark(current: EndMark, proposed: set[EndMark]) -> EndMark:
    """Combine the stored mark with the marks proposed for it in one rule application."""
    if current == EndMark.CONFLICT:
        return current
    wanted = set(proposed)
    if current in (EndMark.HEAD, EndMark.TAIL):
        wanted.add(current)
    if {EndMark.HEAD, EndMark.TAIL} <= wanted:
        return EndMark.CONFLICT
    if EndMark.HEAD in wanted:
        return EndMark.HEAD
    if EndMark.TAIL in wanted:
        return EndMark.TAIL
    return current


@dataclass
class OrientationPolicy:
    """How an orientation phase runs.

    Attributes:
        lagged_only: End marks may only change on lagged edges
        minimize_sepsets: Weak-minimize the separating sets of removed edges
        rfci_tests: Test along paths given the plain separating set
        voter_factory: Builds the membership voter for each rule application
    """

    lagged_only: bool = False
    minimize_sepsets: bool = True
    rfci_tests: bool = False
    voter_factory: VoterFactory = ModifiedMajorityVoter


def apply_proposals(
    state: DiscoveryState,
    proposals: Proposals,
    runner: CIRunner,
    policy: OrientationPolicy,
    phase: str,
) -> bool:
    """Apply one rule's proposals; return True if the graph changed.

    End and middle marks are applied before removals; separating sets of
    removed edges are minimized on the reoriented graph.
    """
    graph = state.graph
    changed = False

    # Step 1: end marks, grouped per homologous mark
    grouped: dict[tuple[tuple[int, int, int], bool], tuple[MarkProposal, set[EndMark]]] = {}
    for proposal in proposals.marks:
        if not graph.is_adjacent(proposal.at, proposal.other):
            continue
        edge = graph.get_edge(proposal.at, proposal.other)
        if policy.lagged_only and edge is not None and not edge.is_lagged:
            continue
        key, _, at_is_i = canonical_key(proposal.at, proposal.other)
        entry = grouped.setdefault((key, at_is_i), (proposal, set()))
        entry[1].add(proposal.mark)
    for proposal, marks in grouped.values():
        current = graph.mark(proposal.at, proposal.other)
        if current is None:
            continue
        resolved = resolve_mark(current, marks)
        if resolved == current:
            continue
        graph.set_mark(proposal.at, proposal.other, resolved)
        changed = True
        action = "conflict" if resolved == EndMark.CONFLICT else "oriented"
        if action == "conflict":
            logger.info("Conflict mark at %s on the edge to %s", proposal.at, proposal.other)
        runner.emit(phase, proposal.at, proposal.other, action)

    # Step 2: middle marks
    for proposal in proposals.middles:
        if not graph.is_adjacent(proposal.u, proposal.v):
            continue
        before = graph.middle(proposal.u, proposal.v)
        after = graph.update_middle(proposal.u, proposal.v, proposal.info)
        if after != before:
            changed = True
            runner.emit(phase, proposal.u, proposal.v, "middle")

    # Step 3: removals, then separating sets on the reduced graph
    removed: list[RemovalProposal] = []
    for removal in sorted(set(proposals.removals), key=_removal_key):
        if graph.is_adjacent(removal.a, removal.b):
            graph.remove_edge(removal.a, removal.b)
            changed = True
        removed.append(removal)
    for removal in removed:
        sepset = removal.sepset
        if policy.minimize_sepsets:
            known = known_ancestors(graph, (removal.a, removal.b))
            sepset = weakly_minimize(sepset, (removal.a, removal.b), known, runner)
        state.sepsets.add(removal.a, removal.b, sepset)
        runner.emit(phase, removal.a, removal.b, "removed", sepset)

    if changed:
        state.record_parents()
    return changed


def _removal_key(removal: RemovalProposal) -> tuple[tuple[int, int, int], int, int]:
    key, shift, _ = canonical_key(removal.a, removal.b)
    return key, shift, len(removal.sepset)


def orientation_phase(
    state: DiscoveryState,
    rules: Iterable[RuleId],
    runner: CIRunner,
    policy: OrientationPolicy | None = None,
) -> DiscoveryState:
    """Apply rules in order until none changes the graph; restart at the first after a change."""
    policy = policy or OrientationPolicy()
    ordered = list(rules)
    position = 0
    applications = 0
    while position < len(ordered):
        rule_id = ordered[position]
        ctx = RuleContext(
            state,
            runner,
            policy.voter_factory(state, runner),
            rfci_tests=policy.rfci_tests,
        )
        proposals = RULES[rule_id](ctx)
        applications += 1
        if not proposals.is_empty() and apply_proposals(
            state, proposals, runner, policy, rule_id.value
        ):
            logger.debug("Rule %s changed the graph", rule_id.value)
            position = 0
        else:
            position += 1
    logger.debug("Orientation phase settled after %d rule applications", applications)
    return state
