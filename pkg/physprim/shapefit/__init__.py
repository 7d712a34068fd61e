"""
Primitive fitting from voxel grids and geometric scoring
"""

from .fitting import FitConfig, fit_primitives, layer_signature
from .scoring import cuboid_iou, f1_score, iou_matrix, match_primitives

__all__ = [
    'FitConfig',
    'fit_primitives',
    'layer_signature',
    'cuboid_iou',
    'f1_score',
    'iou_matrix',
    'match_primitives',
]
