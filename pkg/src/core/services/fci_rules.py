"""FCI orientation of a known MAG skeleton into the time series PAG.

Starts from the MAG adjacencies with circle marks, puts a head at the later
node of every lagged edge, orients unshielded colliders from the MAG and then
applies R1-R4 and R8-R10 until nothing changes. Rules are applied at every
node position of the window; homologous copies share one slot, so every
orientation repeats across time. Selection-variable rules are not used.

Separating-set membership is read off the MAG: on an unshielded triple or at
the end of a discriminating path the middle node is in the separating set
exactly when it is not a collider in the MAG.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

from src.core.domain.graph import Edge, EndMark, MiddleMark, NodeRef, WindowGraph
from src.core.services.graph_paths import (
    discriminating_path,
    is_collider,
    is_directed,
    triples,
    uncovered_pd_paths,
)

logger = logging.getLogger(__name__)

Rule = Callable[[WindowGraph, WindowGraph], bool]


def _orient(pag: WindowGraph, at: NodeRef, other: NodeRef, mark: EndMark) -> bool:
    if pag.mark(at, other) == mark:
        return False
    pag.set_mark(at, other, mark)
    return True


def initial_pag(mag: WindowGraph) -> WindowGraph:
    """MAG skeleton with circles everywhere except heads at later lagged nodes."""
    pag = WindowGraph(mag.n_vars, mag.tau_max)
    for edge in mag.edges():
        if edge.is_lagged:
            pag.set_edge(Edge(edge.a, edge.b, EndMark.CIRCLE, EndMark.HEAD, MiddleMark.EMPTY))
        else:
            pag.set_edge(Edge(edge.a, edge.b, EndMark.CIRCLE, EndMark.CIRCLE, MiddleMark.EMPTY))
    return pag


def apply_r0(pag: WindowGraph, mag: WindowGraph) -> bool:
    changed = False
    for a, b, c in triples(pag):
        if is_collider(mag, a, b, c):
            changed |= _orient(pag, b, a, EndMark.HEAD)
            changed |= _orient(pag, b, c, EndMark.HEAD)
    return changed


def apply_r1(pag: WindowGraph, mag: WindowGraph) -> bool:
    """a *-> b o-* c, a and c non-adjacent: b -> c."""
    changed = False
    for a, b, c in triples(pag):
        if pag.mark(b, a) == EndMark.HEAD and pag.mark(b, c) == EndMark.CIRCLE:
            changed |= _orient(pag, b, c, EndMark.TAIL)
            changed |= _orient(pag, c, b, EndMark.HEAD)
    return changed


def apply_r2(pag: WindowGraph, mag: WindowGraph) -> bool:
    """a -> b *-> c or a *-> b -> c, with a *-o c: a *-> c."""
    changed = False
    for a in pag.nodes():
        for c in pag.neighbors(a):
            if pag.mark(c, a) != EndMark.CIRCLE:
                continue
            for b in pag.neighbors(a):
                if b == c or not pag.is_adjacent(b, c):
                    continue
                if (is_directed(pag, a, b) and pag.mark(c, b) == EndMark.HEAD) or (
                    pag.mark(b, a) == EndMark.HEAD and is_directed(pag, b, c)
                ):
                    changed |= _orient(pag, c, a, EndMark.HEAD)
                    break
    return changed


def apply_r3(pag: WindowGraph, mag: WindowGraph) -> bool:
    """a *-> b <-* c, a *-o d o-* c, a and c non-adjacent, d *-o b: d *-> b."""
    changed = False
    for a, b, c in triples(pag):
        if pag.mark(b, a) != EndMark.HEAD or pag.mark(b, c) != EndMark.HEAD:
            continue
        for d in pag.neighbors(b):
            if d in (a, c) or not (pag.is_adjacent(d, a) and pag.is_adjacent(d, c)):
                continue
            if (
                pag.mark(d, a) == EndMark.CIRCLE
                and pag.mark(d, c) == EndMark.CIRCLE
                and pag.mark(b, d) == EndMark.CIRCLE
            ):
                changed |= _orient(pag, b, d, EndMark.HEAD)
    return changed


def apply_r4(pag: WindowGraph, mag: WindowGraph) -> bool:
    """Discriminating path <x, ..., w, v, y> with v o-* y."""
    changed = False
    for v in pag.nodes():
        for y in pag.neighbors(v):
            if pag.mark(v, y) != EndMark.CIRCLE:
                continue
            path = discriminating_path(pag, v, y)
            if path is None:
                continue
            w = path[-3]
            if is_collider(mag, w, v, y):
                changed |= _orient(pag, v, w, EndMark.HEAD)
                changed |= _orient(pag, v, y, EndMark.HEAD)
                changed |= _orient(pag, y, v, EndMark.HEAD)
            else:
                changed |= _orient(pag, v, y, EndMark.TAIL)
                changed |= _orient(pag, y, v, EndMark.HEAD)
    return changed


def _circle_arrows(pag: WindowGraph) -> list[tuple[NodeRef, NodeRef]]:
    """All window edges a o-> c as (a, c)."""
    found = []
    for a in pag.nodes():
        for c in pag.neighbors(a):
            if pag.mark(a, c) == EndMark.CIRCLE and pag.mark(c, a) == EndMark.HEAD:
                found.append((a, c))
    return found


def apply_r8(pag: WindowGraph, mag: WindowGraph) -> bool:
    """a -> b -> c with a o-> c: a -> c."""
    changed = False
    for a, c in _circle_arrows(pag):
        if any(
            b != c and is_directed(pag, a, b) and is_directed(pag, b, c)
            for b in pag.neighbors(a)
        ):
            changed |= _orient(pag, a, c, EndMark.TAIL)
    return changed


def apply_r9(pag: WindowGraph, mag: WindowGraph) -> bool:
    """a o-> c and an uncovered p.d. path <a, b, ..., c> with b, c non-adjacent: a -> c."""
    changed = False
    for a, c in _circle_arrows(pag):
        if pag.mark(a, c) != EndMark.CIRCLE:
            continue
        for path in uncovered_pd_paths(pag, a, {c}, extend_targets=False):
            if len(path) >= 4 and not pag.is_adjacent(path[1], c):
                changed |= _orient(pag, a, c, EndMark.TAIL)
                break
    return changed


def apply_r10(pag: WindowGraph, mag: WindowGraph) -> bool:
    """a o-> d, b -> d <- e, uncovered p.d. paths a..b and a..e whose second nodes
    are distinct and non-adjacent: a -> d."""
    changed = False
    for a, d in _circle_arrows(pag):
        if pag.mark(a, d) != EndMark.CIRCLE:
            continue
        parents = {x for x in pag.neighbors(d) if x != a and is_directed(pag, x, d)}
        if len(parents) < 2:
            continue
        starts: set[tuple[NodeRef, NodeRef]] = set()
        for path in uncovered_pd_paths(pag, a, parents, forbidden={d}):
            starts.add((path[1], path[-1]))
        if _two_separated_starts(pag, starts):
            changed |= _orient(pag, a, d, EndMark.TAIL)
    return changed


def _two_separated_starts(pag: WindowGraph, starts: set[tuple[NodeRef, NodeRef]]) -> bool:
    ordered = sorted(starts, key=lambda s: (s[0].lag, s[0].var, s[1].lag, s[1].var))
    for k, (mu, end_1) in enumerate(ordered):
        for omega, end_2 in ordered[k + 1 :]:
            if end_1 != end_2 and mu != omega and not pag.is_adjacent(mu, omega):
                return True
    return False


RULES: tuple[Rule, ...] = (
    apply_r1,
    apply_r2,
    apply_r3,
    apply_r4,
    apply_r8,
    apply_r9,
    apply_r10,
)


def orient_pag(mag: WindowGraph) -> WindowGraph:
    """Maximally informative time series PAG for a stationarized MAG."""
    pag = initial_pag(mag)
    apply_r0(pag, mag)
    rounds = 0
    while any(rule(pag, mag) for rule in RULES):
        rounds += 1
    logger.debug("True PAG settled after %d rule rounds", rounds)
    return pag
