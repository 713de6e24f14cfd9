"""Graph comparison against a true PAG.

Adjacencies are scored over canonical pairs, so each homologous edge class
counts once. Edgemarks are scored only where a mark is determined: circles on
either side are neither hits nor misses, conflict marks count as estimated and
wrong, and a true mark replaced by a conflict is missed.
"""

from __future__ import annotations

import math
from collections.abc import Mapping

from src.core.domain.graph import EndMark, LinkClass, WindowGraph, link_class
from src.core.domain.metrics import ClassCounts, Metrics

SlotKey = tuple[int, int, int]


def true_link_type(mark_i: EndMark, mark_j: EndMark) -> str:
    if EndMark.CIRCLE in (mark_i, mark_j):
        return "unoriented"
    if mark_i == mark_j == EndMark.HEAD:
        return "bidirected"
    return "directed"


def _mark_counts(
    estimated: tuple[EndMark, EndMark] | None, truth: tuple[EndMark, EndMark] | None
) -> tuple[int, int, int, int]:
    """(true, recalled, estimated, correct) non-circle marks of one slot."""
    true_marks = recalled = estimated_marks = correct = 0
    for side in (0, 1):
        true_mark = truth[side] if truth else None
        est_mark = estimated[side] if estimated else None
        if true_mark is not None and true_mark != EndMark.CIRCLE:
            true_marks += 1
            recalled += int(est_mark == true_mark)
        if est_mark is not None and est_mark != EndMark.CIRCLE:
            estimated_marks += 1
            correct += int(est_mark == true_mark)
    return true_marks, recalled, estimated_marks, correct


def compare_graphs(
    estimated: WindowGraph,
    truth: WindowGraph,
    imin: Mapping[SlotKey, float] | None = None,
) -> Metrics:
    """Score one estimated graph against the true PAG.

    Args:
        estimated: Output of a discovery run
        truth: True PAG over the same variables and window
        imin: Minimum |statistic| per canonical pair, for the effect size

    Raises:
        ValueError: If the graphs differ in n_vars or tau_max
    """
    if (estimated.n_vars, estimated.tau_max) != (truth.n_vars, truth.tau_max):
        raise ValueError(
            f"Cannot compare graphs over different windows: "
            f"(n_vars={estimated.n_vars}, tau_max={estimated.tau_max}) vs "
            f"(n_vars={truth.n_vars}, tau_max={truth.tau_max})"
        )
    counts = {cls: [0] * 8 for cls in LinkClass}
    link_types = {"directed": 0, "bidirected": 0, "unoriented": 0}
    effects: list[float] = []

    for key in truth.all_slot_keys():
        est_slot, true_slot = estimated.slot(key), truth.slot(key)
        row = counts[link_class(*key)]
        if true_slot is not None:
            row[0] += 1
            row[1] += int(est_slot is not None)
            link_types[true_link_type(true_slot[0], true_slot[1])] += 1
            if imin is not None and key in imin and not math.isnan(imin[key]):
                effects.append(abs(imin[key]))
        else:
            row[2] += 1
            row[3] += int(est_slot is not None)
        marks = _mark_counts(
            est_slot[:2] if est_slot else None,
            true_slot[:2] if true_slot else None,
        )
        for offset, value in enumerate(marks):
            row[4 + offset] += value

    return Metrics(
        classes={cls: ClassCounts(*values) for cls, values in counts.items()},
        effect_sizes=[sum(effects) / len(effects)] if effects else [],
        true_link_types=link_types,
        n_runs=1,
    )
