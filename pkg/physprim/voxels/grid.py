"""
Voxel occupancy grids in the normalized object frame
"""

from typing import Sequence, Tuple

import numpy as np

from ..core.primitives import Primitive, PrimitiveObject
from ..utils.config import get_global_config
from ..utils.error_handling import DomainError, ValidationError

DEFAULT_TRANSLATE = (-0.5, -0.5, -0.5)
DEFAULT_SCALE = 1.0


class VoxelGrid:
    """
    Cubic binary occupancy grid.

    ``occupancy[i, j, k]`` is the cell whose centre sits at
    ``translate + (i + 0.5, j + 0.5, k + 0.5) * scale / resolution``
    on the x, y and z axes respectively.
    """

    def __init__(self, occupancy, translate: Sequence[float] = DEFAULT_TRANSLATE,
                 scale: float = DEFAULT_SCALE):
        occupancy = np.array(occupancy, dtype=bool)
        violations = []
        if occupancy.ndim != 3 or len(set(occupancy.shape)) != 1:
            violations.append(f"occupancy must be a cubic 3D array, got shape {occupancy.shape}")
        elif occupancy.shape[0] < 1:
            violations.append("resolution must be at least 1")
        translate = tuple(float(v) for v in translate)
        if len(translate) != 3:
            violations.append("translate needs 3 components")
        if not scale > 0:
            violations.append(f"scale must be positive, got {scale}")
        if violations:
            raise ValidationError("Invalid voxel grid", violations)
        occupancy.setflags(write=False)
        self._occupancy = occupancy
        self.translate = translate
        self.scale = float(scale)

    def __repr__(self):
        return f"VoxelGrid({self.resolution}^3, {self.count()} occupied)"

    def __eq__(self, other):
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (self.translate == other.translate and self.scale == other.scale
                and np.array_equal(self._occupancy, other._occupancy))

    @property
    def occupancy(self) -> np.ndarray:
        return self._occupancy

    @property
    def resolution(self) -> int:
        return self._occupancy.shape[0]

    @property
    def cell_size(self) -> float:
        return self.scale / self.resolution

    def count(self) -> int:
        return int(np.count_nonzero(self._occupancy))

    @property
    def is_empty(self) -> bool:
        return self.count() == 0

    def occupied_volume(self) -> float:
        return self.count() * self.cell_size ** 3

    def cell_lower(self, index) -> np.ndarray:
        """Lower corner coordinates of cell ``index`` (any integer array, last axis 3)."""
        return np.asarray(self.translate) + np.asarray(index, dtype=float) * self.cell_size

    def occupied_indices(self) -> np.ndarray:
        return np.argwhere(self._occupancy)

    def occupied_centers(self) -> np.ndarray:
        return self.cell_lower(self.occupied_indices() + 0.5)


def cell_centers(resolution: int, translate: Sequence[float] = DEFAULT_TRANSLATE,
                 scale: float = DEFAULT_SCALE) -> np.ndarray:
    """Centres of all cells, shape (resolution, resolution, resolution, 3)."""
    axis = (np.arange(resolution) + 0.5) * (scale / resolution)
    xs, ys, zs = np.meshgrid(axis, axis, axis, indexing='ij')
    return np.stack([xs, ys, zs], axis=-1) + np.asarray(translate, dtype=float)


def _occupancy_of(primitives: Sequence[Primitive], resolution: int) -> np.ndarray:
    centers = cell_centers(resolution).reshape(-1, 3)
    occupied = np.zeros(len(centers), dtype=bool)
    for primitive in primitives:
        occupied |= primitive.contains(centers)
    return occupied.reshape((resolution,) * 3)


def voxelize(obj: PrimitiveObject, resolution: int = None) -> VoxelGrid:
    """
    Voxelize an object: a cell is occupied iff its centre lies inside any cuboid.

    Args:
        obj: Object inside the unit cube
        resolution: Cells per axis (global ``voxel_resolution`` if None)

    Returns:
        VoxelGrid over [-0.5, 0.5]^3
    """
    if resolution is None:
        resolution = get_global_config('voxel_resolution')
    if resolution < 1 or resolution & (resolution - 1):
        raise DomainError(f"Resolution must be a power of two, got {resolution}")
    if not obj.fits_unit_cube():
        low, high = obj.bounds()
        raise DomainError(
            f"Object bounds {low.tolist()}..{high.tolist()} leave the unit cube [-0.5, 0.5]^3"
        )
    return VoxelGrid(_occupancy_of(obj.primitives, resolution))


def voxel_bounds(grid: VoxelGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Tight axis-aligned bounds of the occupied cells in object coordinates."""
    if grid.is_empty:
        raise DomainError("Empty voxel grid has no bounds")
    indices = grid.occupied_indices()
    return grid.cell_lower(indices.min(axis=0)), grid.cell_lower(indices.max(axis=0) + 1)
