"""
Scalar evaluation metrics for density estimation
"""

from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

from ..core.materials import slot_density
from ..core.primitives import PrimitiveObject
from ..shapefit.scoring import iou_matrix
from ..utils.error_handling import DomainError

TOPK_VALUES = (1, 5, 10)
MASS_RATIO_EXPONENTS = tuple(range(-4, 5))


def _is_ranking(value) -> bool:
    return isinstance(value, (list, tuple, np.ndarray))


def topk_accuracy(rankings, truth, k: int) -> float:
    """
    Fraction of primitives whose true slot is among the top ``k`` ranked slots.

    Args:
        rankings: One ranked slot list per primitive, or a single ranked list
        truth: True slots aligned with ``rankings`` (a single slot for a single list)
        k: Cut-off, at least 1

    Raises:
        DomainError: k < 1, an empty ranking or misaligned inputs
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    if not _is_ranking(truth):
        rankings, truth = [rankings], [truth]
    if len(rankings) != len(truth):
        raise DomainError(f"{len(rankings)} rankings for {len(truth)} true slots")
    if len(rankings) == 0:
        raise DomainError("topk_accuracy needs at least one ranking")
    hits = 0
    for ranking, slot in zip(rankings, truth):
        if len(ranking) == 0:
            raise DomainError("topk_accuracy got an empty ranking")
        hits += int(slot in list(ranking[:int(k)]))
    return hits / len(truth)


def per_primitive_rankings(candidates: Sequence, num_primitives: int) -> List[List[int]]:
    """
    Slot rankings per primitive read off a ranked candidate list.

    Each primitive's ranking lists slots in the order they first appear in
    the candidates, best candidate first.
    """
    rankings: List[List[int]] = [[] for _ in range(num_primitives)]
    seen = [set() for _ in range(num_primitives)]
    for candidate in candidates:
        slots = candidate.slots if hasattr(candidate, 'slots') else candidate
        if len(slots) != num_primitives:
            raise DomainError(f"candidate has {len(slots)} slots, expected {num_primitives}")
        for k, slot in enumerate(slots):
            if slot not in seen[k]:
                seen[k].add(slot)
                rankings[k].append(int(slot))
    return rankings


def primitive_correspondence(pred_shape: PrimitiveObject, truth_shape: PrimitiveObject) -> List[int]:
    """
    For each true primitive, the index of the predicted primitive it is scored against.

    The partner is the predicted cuboid of highest IoU; without overlap the
    one with the nearest center. Identical shapes map onto themselves.
    """
    ious = iou_matrix(pred_shape.primitives, truth_shape.primitives)
    pred_centers = np.array([p.translation for p in pred_shape.primitives])
    mapping = []
    for j, primitive in enumerate(truth_shape.primitives):
        if ious[:, j].max() > 0.0:
            mapping.append(int(np.argmax(ious[:, j])))
        else:
            distances = np.linalg.norm(pred_centers - np.asarray(primitive.translation), axis=1)
            mapping.append(int(np.argmin(distances)))
    return mapping


def transfer_slots(values: Sequence, mapping: Sequence[int]) -> List:
    """Reorder per-predicted-primitive values (slots or rankings) onto the true primitives."""
    return [values[i] for i in mapping]


def density_rmse(pred: Sequence[int], truth: Sequence[int]) -> float:
    """Root-mean-square error in slot units (1 slot = 100 kg/m^3)."""
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if pred.shape != truth.shape:
        raise DomainError(f"{pred.size} predicted slots for {truth.size} true slots")
    if pred.size == 0:
        raise DomainError("density_rmse needs at least one slot")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def rmse_by_block_count(frame: pd.DataFrame) -> pd.DataFrame:
    """
    Per-primitive RMSE grouped by the object's block count.

    Args:
        frame: One row per primitive with columns ``num_blocks``, ``pred``, ``truth``

    Returns:
        DataFrame indexed by ``num_blocks`` with columns ``rmse`` and ``count``
    """
    missing = {'num_blocks', 'pred', 'truth'} - set(frame.columns)
    if missing:
        raise DomainError(f"missing columns {sorted(missing)}")
    squared = frame.assign(squared_error=(frame['pred'] - frame['truth']).astype(float) ** 2)
    grouped = squared.groupby('num_blocks')['squared_error'].agg(['mean', 'count'])
    return pd.DataFrame({
        'rmse': np.sqrt(grouped['mean']),
        'count': grouped['count'].astype(int),
    })


def mass_ratio_class(shape: PrimitiveObject, slots: Sequence[int]) -> int:
    """
    Which block is heavier, on the log2 scale: round(log2(m_top / m_bottom))
    clipped to -4..4.
    """
    if len(shape) != 2:
        raise DomainError(f"mass-ratio choice is defined for two-block objects, got {len(shape)} blocks")
    if len(slots) != 2:
        raise DomainError(f"expected 2 slots, got {len(slots)}")
    bottom, top = (slot_density(s) * p.volume for s, p in zip(slots, shape.primitives))
    exponent = int(np.round(np.log2(top / bottom)))
    return int(np.clip(exponent, MASS_RATIO_EXPONENTS[0], MASS_RATIO_EXPONENTS[-1]))


def mass_ratio_agreement(pred_classes: Sequence[int], true_classes: Sequence[int]) -> Dict[str, Union[float, int]]:
    """
    Accuracy and Pearson correlation of predicted against true mass-ratio classes.

    The correlation is NaN when fewer than two pairs exist or either side is constant.
    """
    pred = np.asarray(pred_classes, dtype=float)
    truth = np.asarray(true_classes, dtype=float)
    if pred.shape != truth.shape:
        raise DomainError(f"{pred.size} predicted classes for {truth.size} true classes")
    if pred.size == 0:
        raise DomainError("mass_ratio_agreement needs at least one pair")
    correlation = float('nan')
    if pred.size >= 2 and np.ptp(pred) > 0 and np.ptp(truth) > 0:
        correlation = float(stats.pearsonr(pred, truth)[0])
    return {
        'accuracy': float(np.mean(pred == truth)),
        'pearson_r': correlation,
        'count': int(pred.size),
    }
