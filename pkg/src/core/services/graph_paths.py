"""Graph path helpers shared by the orientation rules.

Triples, potentially directed edges, uncovered potentially directed paths and
discriminating paths over every node position of a WindowGraph. All helpers
are read-only.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterator

from src.core.domain.graph import Edge, EndMark, NodeRef, WindowGraph, node_sort_key

EdgeFilter = Callable[[Edge], bool]


def accept_all(_: Edge) -> bool:
    return True


def triples(graph: WindowGraph, unshielded: bool = True) -> Iterator[tuple[NodeRef, NodeRef, NodeRef]]:
    """Ordered triples (a, b, c) with a - b - c and a != c, both orders included.

    With unshielded=True only triples whose outer nodes are non-adjacent are yielded.
    """
    for b in graph.nodes():
        neighbors = graph.neighbors(b)
        for a in neighbors:
            for c in neighbors:
                if a == c:
                    continue
                if unshielded and graph.is_adjacent(a, c):
                    continue
                yield a, b, c


def is_collider(graph: WindowGraph, a: NodeRef, b: NodeRef, c: NodeRef) -> bool:
    """True if both edges of the path a - b - c have a head at b."""
    return graph.mark(b, a) == EndMark.HEAD and graph.mark(b, c) == EndMark.HEAD


def is_directed(graph: WindowGraph, u: NodeRef, v: NodeRef) -> bool:
    """True for u -> v (tail at u, head at v)."""
    edge = graph.get_edge(u, v)
    return edge is not None and edge.mark_at_a == EndMark.TAIL and edge.mark_at_b == EndMark.HEAD


def is_potentially_directed(graph: WindowGraph, u: NodeRef, v: NodeRef) -> bool:
    """True if the edge u - v could be oriented u -> v: no head at u, no tail at v.

    Conflict marks rule an edge out.
    """
    edge = graph.get_edge(u, v)
    if edge is None:
        return False
    return edge.mark_at_a in (EndMark.TAIL, EndMark.CIRCLE) and edge.mark_at_b in (
        EndMark.HEAD,
        EndMark.CIRCLE,
    )


def uncovered_pd_paths(
    graph: WindowGraph,
    start: NodeRef,
    targets: set[NodeRef],
    forbidden: set[NodeRef] | None = None,
    edge_ok: EdgeFilter = accept_all,
    extend_targets: bool = True,
) -> Iterator[list[NodeRef]]:
    """Uncovered potentially directed paths from start ending in a target node.

    A path is uncovered when every pair of nodes two steps apart is non-adjacent.
    Forbidden nodes never appear on a path. Paths are enumerated depth-first in
    node order; with extend_targets the search continues through a target.
    """
    blocked = set(forbidden or ())
    stack: list[list[NodeRef]] = [[start]]
    while stack:
        path = stack.pop()
        last = path[-1]
        for nxt in reversed(graph.neighbors(last)):
            if nxt in path or nxt in blocked:
                continue
            if not is_potentially_directed(graph, last, nxt):
                continue
            edge = graph.get_edge(last, nxt)
            if edge is None or not edge_ok(edge):
                continue
            if len(path) >= 2 and graph.is_adjacent(path[-2], nxt):
                continue
            extended = [*path, nxt]
            if nxt in targets:
                yield extended
                if not extend_targets:
                    continue
            stack.append(extended)


def discriminating_paths(
    graph: WindowGraph,
    v: NodeRef,
    y: NodeRef,
    edge_ok: EdgeFilter = accept_all,
) -> list[list[NodeRef]]:
    """All shortest discriminating paths <x, q_1, ..., w, v, y> for v with respect to y.

    Every q between x and v is a collider on the path and a parent of y, and x is
    not adjacent to y. Breadth-first search from v stops at the first length
    that yields a path; every path of that length is returned, in node order.
    """
    if not graph.is_adjacent(v, y):
        return []
    level: list[list[NodeRef]] = []
    for w in graph.neighbors(v):
        if w == y:
            continue
        edge_wv, edge_wy = graph.get_edge(w, v), graph.get_edge(w, y)
        if edge_wv is None or edge_wy is None or not (edge_ok(edge_wv) and edge_ok(edge_wy)):
            continue
        if graph.mark(w, v) == EndMark.HEAD and is_directed(graph, w, y):
            # Path held from v backwards: [v, w]
            level.append([v, w])

    seen: set[tuple[NodeRef, NodeRef]] = set()
    while level:
        found: list[list[NodeRef]] = []
        next_level: list[list[NodeRef]] = []
        for path in level:
            q = path[-1]
            for x in graph.neighbors(q):
                if x in path or x == y or (q, x) in seen:
                    continue
                seen.add((q, x))
                edge_xq = graph.get_edge(x, q)
                if edge_xq is None or not edge_ok(edge_xq):
                    continue
                if graph.mark(q, x) != EndMark.HEAD:
                    continue
                if not graph.is_adjacent(x, y):
                    found.append([x, *reversed(path), y])
                    continue
                # x continues the path only as another collider parent of y
                edge_xy = graph.get_edge(x, y)
                if (
                    edge_xy is not None
                    and edge_ok(edge_xy)
                    and is_directed(graph, x, y)
                    and graph.mark(x, q) == EndMark.HEAD
                ):
                    next_level.append([*path, x])
        if found:
            return found
        level = next_level
    return []


def discriminating_path(
    graph: WindowGraph,
    v: NodeRef,
    y: NodeRef,
    edge_ok: EdgeFilter = accept_all,
) -> list[NodeRef] | None:
    """The first shortest discriminating path for v with respect to y, or None."""
    paths = discriminating_paths(graph, v, y, edge_ok)
    return paths[0] if paths else None


def sorted_nodes(nodes: set[NodeRef] | list[NodeRef] | frozenset[NodeRef]) -> list[NodeRef]:
    return sorted(nodes, key=node_sort_key)
