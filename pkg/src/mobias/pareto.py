"""Pareto dominance primitives for bi-objective minimisation.

Shared by the test problems (front-size estimation), the optimisers
(NSGA-II ranking) and the harness (per-run non-dominated archives).
Duplicate objective pairs never dominate each other and are all
retained by the filter.
"""

from __future__ import annotations

from enum import Enum
from typing import Hashable, Sequence

import numpy as np

__all__ = [
    "Dominance",
    "dominates",
    "nondominated_mask",
    "nondominated_filter",
    "fast_nondominated_sort",
    "crowding_distance",
]


class Dominance(Enum):
    FIRST_DOMINATES = "first"
    SECOND_DOMINATES = "second"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def dominates(a, b) -> Dominance:
    """Pairwise dominance between two objective pairs (minimisation).

    First dominates iff it is no worse in both objectives and strictly
    better in at least one; Equal iff both components match exactly.
    """
    a1, a2 = float(a[0]), float(a[1])
    b1, b2 = float(b[0]), float(b[1])
    if not all(map(np.isfinite, (a1, a2, b1, b2))):
        raise ValueError("objective values must be finite")
    if a1 == b1 and a2 == b2:
        return Dominance.EQUAL
    if a1 <= b1 and a2 <= b2:
        return Dominance.FIRST_DOMINATES
    if b1 <= a1 and b2 <= a2:
        return Dominance.SECOND_DOMINATES
    return Dominance.INCOMPARABLE


def nondominated_mask(objectives: np.ndarray) -> np.ndarray:
    """Boolean mask of non-dominated rows of an (n, 2) objective array.

    Sort-and-sweep, O(n log n): rows are ordered by (g1 asc, g2 asc);
    a row survives iff its g2 strictly undercuts the sweep minimum, or
    it exactly duplicates the pair that set that minimum (duplicates
    are mutually non-dominating). Output order matches the input.
    """
    objectives = np.asarray(objectives, dtype=float)
    if objectives.ndim != 2 or objectives.shape[1] != 2 or objectives.shape[0] == 0:
        raise ValueError("expected a non-empty (n, 2) objective array")
    if not np.all(np.isfinite(objectives)):
        raise ValueError("objective values must be finite")
    n = objectives.shape[0]
    order = np.lexsort((objectives[:, 1], objectives[:, 0]))
    g1 = objectives[order, 0]
    g2 = objectives[order, 1]

    # Strict improvement against the running minimum of everything earlier.
    cummin = np.minimum.accumulate(g2)
    prev_min = np.empty(n)
    prev_min[0] = np.inf
    prev_min[1:] = cummin[:-1]
    strict = g2 < prev_min

    # Exact duplicates sit adjacently after the sort; a whole duplicate
    # group is kept iff its first member was a strict improvement.
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    new_group[1:] = (g1[1:] != g1[:-1]) | (g2[1:] != g2[:-1])
    group_id = np.cumsum(new_group) - 1
    keep_sorted = strict[new_group][group_id]

    mask = np.empty(n, dtype=bool)
    mask[order] = keep_sorted
    return mask


def nondominated_filter(points: Sequence[tuple[Hashable, tuple]]) -> set:
    """Ids of all points not strictly dominated by any other.

    Points are (id, (g1, g2)) pairs; ids must be unique. Permutation
    invariant, duplicates retained.
    """
    if len(points) == 0:
        raise ValueError("expected a non-empty point list")
    ids = [pid for pid, _ in points]
    if len(set(ids)) != len(ids):
        raise ValueError("point ids must be unique")
    objectives = np.array([pair for _, pair in points], dtype=float)
    mask = nondominated_mask(objectives)
    return {pid for pid, keep in zip(ids, mask) if keep}


def fast_nondominated_sort(objectives: np.ndarray) -> list[np.ndarray]:
    """Partition rows of an (n, 2) array into dominance ranks.

    Returns fronts as index arrays: front 0 is the non-dominated set;
    each later front is the non-dominated set once earlier fronts are
    removed. Every index appears exactly once.
    """
    objectives = np.asarray(objectives, dtype=float)
    remaining = np.arange(objectives.shape[0])
    fronts: list[np.ndarray] = []
    while remaining.size:
        mask = nondominated_mask(objectives[remaining])
        fronts.append(remaining[mask])
        remaining = remaining[~mask]
    return fronts


def crowding_distance(front: np.ndarray) -> np.ndarray:
    """Crowding distances of a mutually non-dominated (m, 2) front.

    Per objective, the two extreme points get +inf and interior points
    accumulate (neighbour gap) / (objective range); a zero range
    contributes nothing. Ties are broken by stable sort order, so
    duplicate-only fronts get exactly two designated +inf slots.
    """
    front = np.asarray(front, dtype=float)
    if front.ndim != 2 or front.shape[1] != 2 or front.shape[0] == 0:
        raise ValueError("expected a non-empty (m, 2) front array")
    m = front.shape[0]
    distance = np.zeros(m)
    for j in range(2):
        order = np.argsort(front[:, j], kind="stable")
        values = front[order, j]
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        span = values[-1] - values[0]
        if span == 0.0 or m < 3:
            continue
        gaps = (values[2:] - values[:-2]) / span
        distance[order[1:-1]] += gaps
    return distance
