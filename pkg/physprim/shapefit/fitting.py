"""
Fit axis-aligned cuboids to voxelized towers

Each z-layer of the grid gets a signature: the bounding rectangle of its
occupied cells. Consecutive layers whose signatures agree within the merge
tolerance form one segment, and each segment becomes the tight bounding
cuboid of its cells.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.primitives import MAX_PRIMITIVES, Primitive, PrimitiveObject, canonical_order
from ..utils.error_handling import FitError, ValidationError
from ..voxels.grid import VoxelGrid

Signature = Tuple[int, int, int, int]


@dataclass(frozen=True)
class FitConfig:
    """Segmentation bounds, all in voxel cells."""

    min_block_volume: int = 8
    merge_tolerance: int = 1
    max_primitives: int = MAX_PRIMITIVES

    def __post_init__(self):
        violations = []
        if self.min_block_volume < 1:
            violations.append("min_block_volume must be at least 1 cell")
        if self.merge_tolerance < 0:
            violations.append("merge_tolerance must be non-negative")
        if not 1 <= self.max_primitives <= MAX_PRIMITIVES:
            violations.append(f"max_primitives must lie in 1..{MAX_PRIMITIVES}")
        if violations:
            raise ValidationError("Invalid fit configuration", violations)


@dataclass
class _Segment:
    z_start: int
    z_stop: int
    reference: Signature
    low: np.ndarray
    high: np.ndarray
    cells: int

    def absorb(self, other: "_Segment"):
        self.z_start = min(self.z_start, other.z_start)
        self.z_stop = max(self.z_stop, other.z_stop)
        self.low = np.minimum(self.low, other.low)
        self.high = np.maximum(self.high, other.high)
        self.cells += other.cells


def layer_signature(layer) -> Optional[Signature]:
    """Bounding rectangle (x_lo, x_hi, y_lo, y_hi) of a 2D layer, upper bounds exclusive."""
    xs = np.flatnonzero(layer.any(axis=1))
    if xs.size == 0:
        return None
    ys = np.flatnonzero(layer.any(axis=0))
    return (int(xs[0]), int(xs[-1]) + 1, int(ys[0]), int(ys[-1]) + 1)


def _signatures_agree(a: Signature, b: Signature, tolerance: int) -> bool:
    return all(abs(p - q) <= tolerance for p, q in zip(a, b))


def segment_layers(grid: VoxelGrid, config: FitConfig) -> List[_Segment]:
    occupancy = grid.occupancy
    segments: List[_Segment] = []
    current: Optional[_Segment] = None
    for z in range(grid.resolution):
        layer = occupancy[:, :, z]
        signature = layer_signature(layer)
        if signature is None:
            current = None
            continue
        low = np.array([signature[0], signature[2], z])
        high = np.array([signature[1], signature[3], z + 1])
        cells = int(np.count_nonzero(layer))
        if current is not None and _signatures_agree(current.reference, signature, config.merge_tolerance):
            current.absorb(_Segment(z, z + 1, signature, low, high, cells))
        else:
            current = _Segment(z, z + 1, signature, low, high, cells)
            segments.append(current)

    merged: List[_Segment] = []
    for segment in segments:
        if segment.cells < config.min_block_volume and merged:
            merged[-1].absorb(segment)
        else:
            merged.append(segment)
    if len(merged) > 1 and merged[0].cells < config.min_block_volume:
        merged[1].absorb(merged[0])
        merged = merged[1:]
    return merged


def fit_primitives(grid: VoxelGrid, config: Optional[FitConfig] = None,
                   verbose: bool = False) -> PrimitiveObject:
    """
    Decompose a voxel grid into axis-aligned cuboids.

    Args:
        grid: Occupancy grid in the normalized frame
        config: Segmentation settings (defaults if None)
        verbose: Print a summary line

    Returns:
        Geometry-only PrimitiveObject ordered bottom to top

    Raises:
        FitError: empty grid, or more segments than ``max_primitives``
    """
    config = config or FitConfig()
    if grid.is_empty:
        raise FitError("Cannot fit primitives to an empty voxel grid")

    segments = segment_layers(grid, config)
    if len(segments) > config.max_primitives:
        raise FitError(
            f"Found {len(segments)} segments, more than max_primitives={config.max_primitives}; "
            f"try a higher merge tolerance (currently {config.merge_tolerance})"
        )

    primitives = []
    for segment in segments:
        lower = grid.cell_lower(segment.low)
        upper = grid.cell_lower(segment.high)
        primitives.append(Primitive(size=tuple(upper - lower), translation=tuple((lower + upper) / 2.0)))

    if verbose:
        print(f"✅ Fitted {len(primitives)} primitives to {grid.count()} occupied cells")
    return canonical_order(primitives)
