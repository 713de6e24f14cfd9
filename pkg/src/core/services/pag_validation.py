"""LPCMCI-PAG validation against the ground truth.

Checks every claim an LPCMCI-PAG makes about the true MAG and the time series
DAG, at the canonical position of each homologous edge:
- heads deny ancestorship and tails assert it
- a missing edge means non-adjacency in the MAG
- 'L', 'R' and '!' deny separability by parents of the earlier, later or both nodes
- an empty middle mark asserts adjacency in the MAG
Used by the property suites after every step of oracle runs.
"""

from __future__ import annotations

import itertools

from src.core.domain.graph import Edge, EndMark, MiddleMark, NodeRef, WindowGraph
from src.core.services.oracle_service import TimeSeriesOracle

MAX_PARENT_SUBSETS = 4096


def _separable_by_parents(
    oracle: TimeSeriesOracle, x: NodeRef, other: NodeRef
) -> bool:
    """True if some subset of pa(x, MAG) separates x and other."""
    parents = sorted(oracle.mag.parents(x) - {other}, key=lambda n: (-n.lag, n.var))
    checked = 0
    for size in range(len(parents) + 1):
        for subset in itertools.combinations(parents, size):
            if oracle.d_separated(x, other, subset):
                return True
            checked += 1
            if checked >= MAX_PARENT_SUBSETS:
                return False
    return False


def _left_claim_violated(oracle: TimeSeriesOracle, a: NodeRef, b: NodeRef) -> bool:
    """'L' on a - b with a < b: b not in an(a), or no subset of pa(a) separates."""
    return oracle.is_ancestor(b, a) and _separable_by_parents(oracle, a, b)


def _right_claim_violated(oracle: TimeSeriesOracle, a: NodeRef, b: NodeRef) -> bool:
    """'R' on a - b with a < b: a not in an(b), or no subset of pa(b) separates."""
    return oracle.is_ancestor(a, b) and _separable_by_parents(oracle, b, a)


def _edge_violations(edge: Edge, oracle: TimeSeriesOracle) -> list[str]:
    a, b = edge.a, edge.b
    label = f"{a} - {b}"
    problems: list[str] = []
    for node, other, mark in ((a, b, edge.mark_at_a), (b, a, edge.mark_at_b)):
        if mark == EndMark.HEAD and oracle.is_ancestor(node, other):
            problems.append(f"{label}: head at {node} but {node} is an ancestor of {other}")
        if mark == EndMark.TAIL and not oracle.is_ancestor(node, other):
            problems.append(f"{label}: tail at {node} but {node} is no ancestor of {other}")

    middle = edge.middle
    if middle in (MiddleMark.LEFT, MiddleMark.BANG) and _left_claim_violated(oracle, a, b):
        problems.append(f"{label}: middle '{middle.value}' but parents of {a} separate the pair")
    if middle in (MiddleMark.RIGHT, MiddleMark.BANG) and _right_claim_violated(oracle, a, b):
        problems.append(f"{label}: middle '{middle.value}' but parents of {b} separate the pair")
    if middle == MiddleMark.EMPTY and not oracle.mag.is_adjacent(a, b):
        problems.append(f"{label}: empty middle mark but the pair is not adjacent in the MAG")
    return problems


def validate_lpcmci_pag(graph: WindowGraph, oracle: TimeSeriesOracle) -> list[str]:
    """List every violated LPCMCI-PAG condition; an empty list means valid.

    Raises:
        ValueError: If graph and oracle disagree on the window
    """
    if graph.n_vars != oracle.n_observed or graph.tau_max != oracle.tau_max:
        raise ValueError(
            f"Graph window ({graph.n_vars}, {graph.tau_max}) does not match the oracle "
            f"({oracle.n_observed}, {oracle.tau_max})"
        )
    violations: list[str] = []
    for edge in oracle.mag.edges():
        if not graph.is_adjacent(edge.a, edge.b):
            violations.append(f"{edge.a} - {edge.b}: adjacent in the MAG but missing")
    for edge in graph.edges():
        violations.extend(_edge_violations(edge, oracle))
    return violations
