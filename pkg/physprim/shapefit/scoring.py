"""
Geometric reconstruction scores: cuboid IoU and primitive F1
"""

from typing import List, Sequence, Tuple, Union

import numpy as np

from ..core.primitives import Primitive, PrimitiveObject, canonical_order
from ..utils.error_handling import DomainError

SAMPLING_RESOLUTION = 64
IOU_THRESHOLD = 0.5


def _aabb_iou(a: Primitive, b: Primitive) -> float:
    low_a, high_a = a.bounds()
    low_b, high_b = b.bounds()
    overlap = np.clip(np.minimum(high_a, high_b) - np.maximum(low_a, low_b), 0.0, None)
    intersection = float(np.prod(overlap))
    union = a.volume + b.volume - intersection
    return intersection / union


def _sampled_iou(a: Primitive, b: Primitive, resolution: int) -> float:
    low = np.minimum(a.bounds()[0], b.bounds()[0])
    high = np.maximum(a.bounds()[1], b.bounds()[1])
    axes = [low[i] + (np.arange(resolution) + 0.5) * (high[i] - low[i]) / resolution for i in range(3)]
    points = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, 3)
    inside_a = a.contains(points)
    inside_b = b.contains(points)
    union = np.count_nonzero(inside_a | inside_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(inside_a & inside_b) / union


def cuboid_iou(a: Primitive, b: Primitive, resolution: int = SAMPLING_RESOLUTION) -> float:
    """
    Volume intersection over union of two cuboids.

    Exact for axis-aligned cuboids; rotated cuboids are compared by sampling
    a ``resolution``^3 lattice over their joint bounding box.
    """
    if a.volume <= 0.0 or b.volume <= 0.0:
        raise DomainError("IoU is undefined for zero-volume cuboids")
    if a.is_axis_aligned and b.is_axis_aligned:
        return _aabb_iou(a, b)
    return float(_sampled_iou(a, b, resolution))


def iou_matrix(pred: Sequence[Primitive], truth: Sequence[Primitive]) -> np.ndarray:
    return np.array([[cuboid_iou(p, t) for t in truth] for p in pred]).reshape(len(pred), len(truth))


def _as_object(value: Union[PrimitiveObject, Sequence[Primitive]]) -> PrimitiveObject:
    if isinstance(value, PrimitiveObject):
        return canonical_order(value.primitives)
    return canonical_order(value)


def match_primitives(pred, truth, threshold: float = IOU_THRESHOLD) -> List[Tuple[int, int, float]]:
    """
    Greedy one-to-one matching in descending IoU.

    Returns (pred index, truth index, IoU) for matched pairs with IoU strictly
    above ``threshold``, sorted by pred index. Indices refer to the canonical
    (bottom-to-top) order. When the truth cuboids do not overlap, each
    prediction has IoU above 0.5 with at most one of them, so at the default
    threshold greedy and optimal matching agree.
    """
    pred, truth = _as_object(pred), _as_object(truth)
    ious = iou_matrix(pred.primitives, truth.primitives)
    used_pred, used_truth = set(), set()
    matches = []
    for flat in np.argsort(-ious, axis=None, kind='stable'):
        i, j = np.unravel_index(flat, ious.shape)
        if ious[i, j] <= threshold:
            break
        if i in used_pred or j in used_truth:
            continue
        used_pred.add(i)
        used_truth.add(j)
        matches.append((int(i), int(j), float(ious[i, j])))
    return sorted(matches)


def f1_score(pred, truth, threshold: float = IOU_THRESHOLD) -> float:
    """F1 of predicted cuboids; a match counts as true positive when IoU > threshold."""
    pred, truth = _as_object(pred), _as_object(truth)
    true_positives = len(match_primitives(pred, truth, threshold))
    if true_positives == 0:
        return 0.0
    precision = true_positives / len(pred)
    recall = true_positives / len(truth)
    return 2.0 * precision * recall / (precision + recall)
