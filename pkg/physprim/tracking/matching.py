"""
Minimum-distance point correspondence between consecutive frames
"""

from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .keypoints import KeypointFrame
from ..utils.error_handling import DomainError


def match_points(prev: KeypointFrame, curr: KeypointFrame) -> np.ndarray:
    """
    Optimal bipartite matching of ``curr`` detections to ``prev`` points.

    Visible points of both frames are paired to minimize the summed
    Euclidean distance; points left over (invisible on either side) are
    paired in index order.

    Returns:
        Permutation ``assignment`` with ``curr`` point ``assignment[i]``
        corresponding to ``prev`` point ``i``

    Raises:
        DomainError: the frames hold different numbers of points
    """
    if len(prev) != len(curr):
        raise DomainError(f"Cannot match {len(prev)} points to {len(curr)} points")
    n = len(prev)
    assignment = np.full(n, -1, dtype=int)

    prev_visible = np.flatnonzero(prev.visible)
    curr_visible = np.flatnonzero(curr.visible)
    if prev_visible.size and curr_visible.size:
        cost = cdist(prev.points[prev_visible], curr.points[curr_visible])
        rows, cols = linear_sum_assignment(cost)
        assignment[prev_visible[rows]] = curr_visible[cols]

    leftover = sorted(set(range(n)) - set(assignment[assignment >= 0].tolist()))
    assignment[assignment < 0] = leftover
    return assignment


def matching_cost(prev: KeypointFrame, curr: KeypointFrame, assignment: Sequence[int]) -> float:
    """Summed distance of an assignment over points visible in both frames."""
    assignment = np.asarray(assignment, dtype=int)
    both = prev.visible & curr.visible[assignment]
    if not np.any(both):
        return 0.0
    deltas = prev.points[both] - curr.points[assignment[both]]
    return float(np.linalg.norm(deltas, axis=1).sum())
