"""WindowGraph Domain Object - Time series graphs over a lag window.

Represents estimated and ground-truth graphs over nodes X^j_{t-tau} with:
- End marks (tail, head, circle, conflict) and middle marks
- One canonical slot per homologous edge class (stationarity is structural)
- The fixed total node order used by the middle-mark semantics
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum
from typing import Any


class EndMark(str, Enum):
    """Mark at one end of an edge."""

    TAIL = "tail"
    HEAD = "head"
    CIRCLE = "circle"
    CONFLICT = "x"


class MiddleMark(str, Enum):
    """Middle mark recording which separability searches are exhausted."""

    UNKNOWN = "?"
    LEFT = "L"
    RIGHT = "R"
    BANG = "!"
    EMPTY = ""


class LinkClass(str, Enum):
    """Classes used to report adjacency and orientation scores."""

    AUTO = "auto"
    LAGGED = "lagged"
    CONTEMPORANEOUS = "contemporaneous"


class TimeOrderError(ValueError):
    """Raised when an edge would let an effect precede its cause."""

    def __init__(self, edge: "Edge") -> None:
        self.edge = edge
        super().__init__(
            f"Edge {edge.a}-{edge.b} puts a tail at the later node {edge.later}; "
            "a node cannot be an ancestor of its own past"
        )


@dataclass(frozen=True)
class NodeRef:
    """A node X^var_{t-lag} of a time series graph.

    Attributes:
        var: Variable index 0..N-1
        lag: Non-negative time lag

    Invariants:
        - var >= 0 and lag >= 0 (lag <= tau_max is checked by the owning graph)
    """

    var: int
    lag: int

    def __post_init__(self) -> None:
        if self.var < 0:
            raise ValueError(f"NodeRef var must be non-negative. Got: {self.var}")
        if self.lag < 0:
            raise ValueError(f"NodeRef lag must be non-negative. Got: {self.lag}")

    def shift(self, delta: int) -> NodeRef:
        """Return the node moved delta steps further into the past."""
        return NodeRef(self.var, self.lag + delta)

    def __str__(self) -> str:
        return f"X{self.var}(t-{self.lag})" if self.lag else f"X{self.var}(t)"

    def to_list(self) -> list[int]:
        return [self.var, self.lag]


def node_less(u: NodeRef, v: NodeRef) -> bool:
    """Total order: earlier nodes first, ties broken by variable index."""
    return u.lag > v.lag or (u.lag == v.lag and u.var < v.var)


def node_sort_key(node: NodeRef) -> tuple[int, int]:
    """Sort key that orders nodes ascending in the node_less order."""
    return (-node.lag, node.var)


def is_future_of_both(node: NodeRef, a: NodeRef, b: NodeRef) -> bool:
    """Return True if node lies strictly after both a and b in time."""
    return node.lag < min(a.lag, b.lag)


# '?' is neutral and Empty absorbs; L and R together give '!',
# which already implies both.
_MIDDLE_STRENGTH = {
    MiddleMark.UNKNOWN: 0,
    MiddleMark.LEFT: 1,
    MiddleMark.RIGHT: 1,
    MiddleMark.BANG: 2,
    MiddleMark.EMPTY: 3,
}


_MIRRORED_MIDDLE = {MiddleMark.LEFT: MiddleMark.RIGHT, MiddleMark.RIGHT: MiddleMark.LEFT}


def combine_middle_marks(old: MiddleMark, new: MiddleMark) -> MiddleMark:
    """Combine a stored middle mark with newly established information."""
    if old == new:
        return old
    if {old, new} == {MiddleMark.LEFT, MiddleMark.RIGHT}:
        return MiddleMark.BANG
    return old if _MIDDLE_STRENGTH[old] >= _MIDDLE_STRENGTH[new] else new


def link_class(i: int, tau: int, j: int) -> LinkClass:
    """Classify a canonical link (i, tau) - (j, 0)."""
    if i == j:
        return LinkClass.AUTO
    return LinkClass.LAGGED if tau > 0 else LinkClass.CONTEMPORANEOUS


SlotKey = tuple[int, int, int]


def canonical_key(u: NodeRef, v: NodeRef) -> tuple[SlotKey, int, bool]:
    """Map a node pair onto its homologous slot.

    Returns:
        (slot key (i, tau, j), shift of the later node, True if u is the slot's i-end)
    """
    if u == v:
        raise ValueError(f"Self-edges are not allowed: {u}")
    if node_less(u, v):
        a, b, u_is_a = u, v, True
    else:
        a, b, u_is_a = v, u, False
    return (a.var, a.lag - b.lag, b.var), b.lag, u_is_a


@dataclass(frozen=True)
class Edge:
    """An edge between two window nodes, viewed from node a.

    Attributes:
        a: First endpoint
        b: Second endpoint
        mark_at_a: End mark at a
        mark_at_b: End mark at b
        middle: Middle mark, relative to the node order of the endpoints

    Invariants:
        - a != b
    """

    a: NodeRef
    b: NodeRef
    mark_at_a: EndMark
    mark_at_b: EndMark
    middle: MiddleMark = MiddleMark.EMPTY

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError(f"Edge endpoints must differ. Got: {self.a}")

    @property
    def is_lagged(self) -> bool:
        return self.a.lag != self.b.lag

    @property
    def later(self) -> NodeRef:
        return self.b if node_less(self.a, self.b) else self.a

    def mark_at(self, node: NodeRef) -> EndMark:
        """Return the end mark at one endpoint."""
        if node == self.a:
            return self.mark_at_a
        if node == self.b:
            return self.mark_at_b
        raise ValueError(f"{node} is not an endpoint of edge {self.a}-{self.b}")

    def other(self, node: NodeRef) -> NodeRef:
        return self.b if node == self.a else self.a

    def reversed(self) -> Edge:
        return Edge(self.b, self.a, self.mark_at_b, self.mark_at_a, self.middle)


_SYMBOL_AT_LEFT = {EndMark.TAIL: "-", EndMark.HEAD: "<", EndMark.CIRCLE: "o", EndMark.CONFLICT: "x"}
_SYMBOL_AT_RIGHT = {EndMark.TAIL: "-", EndMark.HEAD: ">", EndMark.CIRCLE: "o", EndMark.CONFLICT: "x"}


def edge_symbol(mark_left: EndMark, mark_right: EndMark, middle: MiddleMark = MiddleMark.EMPTY) -> str:
    """Render marks as e.g. 'o-?->' for reports and diffs."""
    mid = f"{middle.value}" if middle.value else ""
    return f"{_SYMBOL_AT_LEFT[mark_left]}-{mid}-{_SYMBOL_AT_RIGHT[mark_right]}"


class WindowGraph:
    """Graph over nodes (var, lag) for lag in 0..tau_max with homologous edges.

    Every edge class is stored once under the key (i, tau, j) with the node
    (j, 0) as the later endpoint; contemporaneous pairs are keyed with i < j.
    Any time-shifted query resolves to the same slot.

    Attributes:
        n_vars: Number of observed variables N
        tau_max: Maximum lag of the window

    Invariants:
        - At most one edge per node pair
        - No tail at the later node of a lagged edge
        - Conflict marks only at end marks
    """

    def __init__(self, n_vars: int, tau_max: int) -> None:
        if n_vars < 1:
            raise ValueError(f"WindowGraph needs at least one variable. Got: {n_vars}")
        if tau_max < 0:
            raise ValueError(f"tau_max must be non-negative. Got: {tau_max}")
        self.n_vars = n_vars
        self.tau_max = tau_max
        self._slots: dict[SlotKey, tuple[EndMark, EndMark, MiddleMark]] = {}
        self._by_var: dict[int, set[SlotKey]] = {v: set() for v in range(n_vars)}

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def complete(cls, n_vars: int, tau_max: int) -> WindowGraph:
        """Initial graph: lagged links o-L->, contemporaneous links o-?-o."""
        graph = cls(n_vars, tau_max)
        for key in graph.all_slot_keys():
            i, tau, j = key
            if tau > 0:
                graph._put(key, (EndMark.CIRCLE, EndMark.HEAD, MiddleMark.LEFT))
            else:
                graph._put(key, (EndMark.CIRCLE, EndMark.CIRCLE, MiddleMark.UNKNOWN))
        return graph

    def all_slot_keys(self) -> list[SlotKey]:
        """All slots a complete graph over this window has, in canonical order."""
        keys: list[SlotKey] = []
        for tau in range(self.tau_max + 1):
            for i in range(self.n_vars):
                for j in range(self.n_vars):
                    if tau == 0 and i >= j:
                        continue
                    keys.append((i, tau, j))
        return keys

    def copy(self) -> WindowGraph:
        clone = WindowGraph(self.n_vars, self.tau_max)
        clone._slots = dict(self._slots)
        clone._by_var = {v: set(keys) for v, keys in self._by_var.items()}
        return clone

    # ------------------------------------------------------------------
    # Nodes
    # ------------------------------------------------------------------

    def nodes(self) -> list[NodeRef]:
        return [NodeRef(v, lag) for lag in range(self.tau_max, -1, -1) for v in range(self.n_vars)]

    def in_window(self, node: NodeRef) -> bool:
        return 0 <= node.var < self.n_vars and 0 <= node.lag <= self.tau_max

    # ------------------------------------------------------------------
    # Slot storage
    # ------------------------------------------------------------------

    def _put(self, key: SlotKey, value: tuple[EndMark, EndMark, MiddleMark]) -> None:
        self._slots[key] = value
        self._by_var[key[0]].add(key)
        self._by_var[key[2]].add(key)

    def _drop(self, key: SlotKey) -> None:
        if key in self._slots:
            del self._slots[key]
            self._by_var[key[0]].discard(key)
            self._by_var[key[2]].discard(key)

    def _resolve(self, u: NodeRef, v: NodeRef) -> tuple[SlotKey, bool] | None:
        if not (self.in_window(u) and self.in_window(v)) or u == v:
            return None
        key, _, u_is_i = canonical_key(u, v)
        return key, u_is_i

    def has_slot(self, key: SlotKey) -> bool:
        return key in self._slots

    def slot(self, key: SlotKey) -> tuple[EndMark, EndMark, MiddleMark] | None:
        return self._slots.get(key)

    # ------------------------------------------------------------------
    # Edge queries and updates
    # ------------------------------------------------------------------

    def get_edge(self, u: NodeRef, v: NodeRef) -> Edge | None:
        """Return the edge between u and v viewed from u, or None if absent."""
        resolved = self._resolve(u, v)
        if resolved is None:
            return None
        key, u_is_i = resolved
        value = self._slots.get(key)
        if value is None:
            return None
        mark_i, mark_j, middle = value
        if u_is_i:
            return Edge(u, v, mark_i, mark_j, middle)
        return Edge(u, v, mark_j, mark_i, middle)

    def is_adjacent(self, u: NodeRef, v: NodeRef) -> bool:
        resolved = self._resolve(u, v)
        return resolved is not None and resolved[0] in self._slots

    def mark(self, at: NodeRef, other: NodeRef) -> EndMark | None:
        """Return the mark at `at` on the edge at-other, or None if absent."""
        edge = self.get_edge(at, other)
        return None if edge is None else edge.mark_at_a

    def middle(self, u: NodeRef, v: NodeRef) -> MiddleMark | None:
        edge = self.get_edge(u, v)
        return None if edge is None else edge.middle

    def set_edge(self, edge: Edge) -> None:
        """Store an edge in its canonical slot (all homologous copies change).

        Raises:
            ValueError: If an endpoint lies outside the window
            TimeOrderError: If a tail sits at the later node of a lagged edge
        """
        if not (self.in_window(edge.a) and self.in_window(edge.b)):
            raise ValueError(
                f"Edge {edge.a}-{edge.b} lies outside the window "
                f"(n_vars={self.n_vars}, tau_max={self.tau_max})"
            )
        if edge.is_lagged and edge.mark_at(edge.later) == EndMark.TAIL:
            raise TimeOrderError(edge)
        key, _, a_is_i = canonical_key(edge.a, edge.b)
        if a_is_i:
            self._put(key, (edge.mark_at_a, edge.mark_at_b, edge.middle))
        else:
            self._put(key, (edge.mark_at_b, edge.mark_at_a, edge.middle))

    def set_mark(self, at: NodeRef, other: NodeRef, mark: EndMark) -> None:
        """Change the end mark at `at` on the edge at-other."""
        edge = self.get_edge(at, other)
        if edge is None:
            raise KeyError(f"No edge between {at} and {other}")
        self.set_edge(Edge(at, other, mark, edge.mark_at_b, edge.middle))

    def set_middle(self, u: NodeRef, v: NodeRef, middle: MiddleMark) -> None:
        edge = self.get_edge(u, v)
        if edge is None:
            raise KeyError(f"No edge between {u} and {v}")
        self.set_edge(Edge(u, v, edge.mark_at_a, edge.mark_at_b, middle))

    def update_middle(self, u: NodeRef, v: NodeRef, new: MiddleMark) -> MiddleMark:
        """Combine the stored middle mark with new information; return the result."""
        edge = self.get_edge(u, v)
        if edge is None:
            raise KeyError(f"No edge between {u} and {v}")
        combined = combine_middle_marks(edge.middle, new)
        if combined != edge.middle:
            self.set_edge(Edge(u, v, edge.mark_at_a, edge.mark_at_b, combined))
        return combined

    def remove_edge(self, u: NodeRef, v: NodeRef) -> None:
        resolved = self._resolve(u, v)
        if resolved is not None:
            self._drop(resolved[0])

    # ------------------------------------------------------------------
    # Neighbourhoods
    # ------------------------------------------------------------------

    def neighbors(self, node: NodeRef) -> list[NodeRef]:
        """Window nodes adjacent to node, in node order."""
        found: list[NodeRef] = []
        for i, tau, j in self._by_var.get(node.var, ()):
            if i == node.var:
                delta = node.lag - tau
                if 0 <= delta <= self.tau_max - tau:
                    candidate = NodeRef(j, delta)
                    if candidate != node:
                        found.append(candidate)
            if j == node.var:
                if node.lag + tau <= self.tau_max:
                    candidate = NodeRef(i, node.lag + tau)
                    if candidate != node:
                        found.append(candidate)
        return sorted(set(found), key=node_sort_key)

    def parents(self, node: NodeRef) -> set[NodeRef]:
        """Nodes w with w -> node (tail at w, head at node)."""
        result: set[NodeRef] = set()
        for w in self.neighbors(node):
            edge = self.get_edge(w, node)
            if edge and edge.mark_at_a == EndMark.TAIL and edge.mark_at_b == EndMark.HEAD:
                result.add(w)
        return result

    def edges(self) -> Iterator[Edge]:
        """Canonical edges (i, tau) - (j, 0) in slot order."""
        for key in sorted(self._slots, key=lambda k: (k[1], k[0], k[2])):
            i, tau, j = key
            mark_i, mark_j, middle = self._slots[key]
            yield Edge(NodeRef(i, tau), NodeRef(j, 0), mark_i, mark_j, middle)

    def window_edges(self) -> Iterator[Edge]:
        """Every edge instance inside the window, including homologous copies."""
        for edge in self.edges():
            tau = edge.a.lag
            for delta in range(self.tau_max - tau + 1):
                yield Edge(
                    edge.a.shift(delta), edge.b.shift(delta), edge.mark_at_a, edge.mark_at_b, edge.middle
                )

    def middle_marks(self) -> set[MiddleMark]:
        return {value[2] for value in self._slots.values()}

    def __len__(self) -> int:
        return len(self._slots)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WindowGraph):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and self.tau_max == other.tau_max
            and self._slots == other._slots
        )

    def __hash__(self) -> int:  # pragma: no cover - graphs are mutable
        raise TypeError("WindowGraph is unhashable")

    # ------------------------------------------------------------------
    # Utilities
    # ------------------------------------------------------------------

    def permute(self, perm: list[int]) -> WindowGraph:
        """Relabel variable v as perm[v].

        L and R swap on contemporaneous edges whose endpoint order flips.
        """
        if sorted(perm) != list(range(self.n_vars)):
            raise ValueError(f"perm must be a permutation of 0..{self.n_vars - 1}. Got: {perm}")
        result = WindowGraph(self.n_vars, self.tau_max)
        for edge in self.edges():
            a = NodeRef(perm[edge.a.var], edge.a.lag)
            b = NodeRef(perm[edge.b.var], edge.b.lag)
            middle = edge.middle
            if not node_less(a, b):
                middle = _MIRRORED_MIDDLE.get(middle, middle)
            result.set_edge(Edge(a, b, edge.mark_at_a, edge.mark_at_b, middle))
        return result

    def diff(self, other: WindowGraph) -> list[str]:
        """Human-readable list of slots where the two graphs differ."""
        lines: list[str] = []
        for key in sorted(set(self._slots) | set(other._slots), key=lambda k: (k[1], k[0], k[2])):
            mine, theirs = self._slots.get(key), other._slots.get(key)
            if mine == theirs:
                continue
            i, tau, j = key
            left = edge_symbol(*mine) if mine else "absent"
            right = edge_symbol(*theirs) if theirs else "absent"
            lines.append(f"{NodeRef(i, tau)} {NodeRef(j, 0)}: {left} vs {right}")
        return lines

    def summary(self) -> dict[str, dict[str, int]]:
        """Edge counts by link class and edge type."""
        counts: dict[str, dict[str, int]] = {c.value: {} for c in LinkClass}
        for key, (mark_i, mark_j, middle) in self._slots.items():
            cls = link_class(*key).value
            symbol = edge_symbol(mark_i, mark_j, middle)
            counts[cls][symbol] = counts[cls].get(symbol, 0) + 1
        return counts

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the Graph JSON format."""
        edges: list[dict[str, Any]] = []
        for edge in self.edges():
            record: dict[str, Any] = {
                "i": edge.a.var,
                "tau": edge.a.lag,
                "j": edge.b.var,
                "mark_i": edge.mark_at_a.value,
                "mark_j": edge.mark_at_b.value,
            }
            if edge.middle != MiddleMark.EMPTY:
                record["middle"] = edge.middle.value
            edges.append(record)
        return {"n_vars": self.n_vars, "tau_max": self.tau_max, "edges": edges}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> WindowGraph:
        """Parse the Graph JSON format.

        Raises:
            ValueError: On unknown marks or malformed edges
        """
        try:
            graph = cls(int(data["n_vars"]), int(data["tau_max"]))
            for record in data.get("edges", []):
                graph.set_edge(
                    Edge(
                        NodeRef(int(record["i"]), int(record["tau"])),
                        NodeRef(int(record["j"]), 0),
                        EndMark(record["mark_i"]),
                        EndMark(record["mark_j"]),
                        MiddleMark(record.get("middle", "")),
                    )
                )
        except KeyError as e:
            raise ValueError(f"Graph JSON is missing field {e}") from e
        return graph

    def __repr__(self) -> str:
        return f"WindowGraph(n_vars={self.n_vars}, tau_max={self.tau_max}, edges={len(self)})"
