"""
Synthetic block towers

Blocks are stacked bottom to top: each block's horizontal centre is drawn
around the centre of the block below it, with a standard deviation of a
quarter of that block's width (x) or depth (y), and its vertical centre
sits exactly on top of the block below. Towers are then rescaled and
shifted into the unit cube with the base on the ground plane.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.materials import MATERIALS, MATERIAL_NAMES
from ..core.primitives import Primitive, PrimitiveObject, canonical_order
from ..utils.error_handling import GenerationError, ValidationError
from ..utils.rotations import quat_from_axis_angle

GROUND_Z = -0.5
MIN_BLOCK_SIZE = 0.1
MAX_BLOCK_SIZE = 0.5
MIN_FOOTPRINT_OVERLAP = 0.25
SUPPORT_SHRINK = 0.9
MAX_RESAMPLE_ATTEMPTS = 100
MIN_GRID_CELLS = 2

Seed = Union[int, Sequence[int]]


@dataclass(frozen=True)
class TowerSpec:
    """
    Parameters of one generated tower.

    ``grid_aligned`` snaps every face onto the voxel lattice of the given
    resolution. ``size_noise`` (relative) and ``rotation_noise_deg`` (yaw
    range) perturb the blocks; they cannot be combined with grid alignment.
    """

    num_blocks: int
    rng_seed: Seed = 0
    num_density_configs: int = 8
    grid_aligned: bool = False
    size_noise: float = 0.0
    rotation_noise_deg: float = 0.0
    resolution: int = 32

    def __post_init__(self):
        violations = []
        if not isinstance(self.num_blocks, (int, np.integer)) or not 2 <= self.num_blocks <= 5:
            violations.append(f"num_blocks {self.num_blocks!r} must be an integer in 2..5")
        if self.num_density_configs < 1:
            violations.append("num_density_configs must be at least 1")
        if not 0.0 <= self.size_noise < 1.0:
            violations.append("size_noise must lie in [0, 1)")
        if not 0.0 <= self.rotation_noise_deg <= 45.0:
            violations.append("rotation_noise_deg must lie in [0, 45]")
        if self.grid_aligned and (self.size_noise or self.rotation_noise_deg):
            violations.append("grid_aligned towers cannot carry size or rotation noise")
        if self.resolution < MIN_GRID_CELLS * 5:
            violations.append(f"resolution {self.resolution} too coarse for grid-aligned stacking")
        if violations:
            raise ValidationError("Invalid tower spec", violations)


def stack_blocks(sizes, offsets_xy=None) -> np.ndarray:
    """
    Centres of blocks stacked on the ground, before normalization.

    Args:
        sizes: (n, 3) block edge lengths (width, depth, height)
        offsets_xy: (n, 2) horizontal centres (zeros if None)

    Returns:
        (n, 3) block centres; block 1 rests on z = -0.5 and
        ``z_k = z_{k-1} + (d_{k-1} + d_k) / 2``
    """
    sizes = np.asarray(sizes, dtype=float)
    n = sizes.shape[0]
    centers = np.zeros((n, 3))
    if offsets_xy is not None:
        centers[:, :2] = np.asarray(offsets_xy, dtype=float)
    centers[0, 2] = GROUND_Z + sizes[0, 2] / 2.0
    for k in range(1, n):
        centers[k, 2] = centers[k - 1, 2] + (sizes[k - 1, 2] + sizes[k, 2]) / 2.0
    return centers


def footprint_overlap(center_a, size_a, center_b, size_b) -> float:
    """Intersection area of two axis-aligned xy footprints."""
    overlap = 1.0
    for axis in (0, 1):
        low = max(center_a[axis] - size_a[axis] / 2.0, center_b[axis] - size_b[axis] / 2.0)
        high = min(center_a[axis] + size_a[axis] / 2.0, center_b[axis] + size_b[axis] / 2.0)
        overlap *= max(0.0, high - low)
    return overlap


def _horizontal_extent(sizes, yaws) -> np.ndarray:
    """Full xy extents of yaw-rotated blocks, shape (n, 2)."""
    c, s = np.abs(np.cos(yaws)), np.abs(np.sin(yaws))
    return np.stack([c * sizes[:, 0] + s * sizes[:, 1], s * sizes[:, 0] + c * sizes[:, 1]], axis=1)


def is_supported(centers, sizes, yaws=None, min_overlap: float = MIN_FOOTPRINT_OVERLAP) -> bool:
    """
    Overlap and support rules for a stacked tower.

    Consecutive footprints must overlap by at least ``min_overlap`` of the
    smaller footprint, and every block centre must lie inside the bottom
    block footprint shrunk to 90 %, which keeps the composite centre of
    mass above its support for any density assignment.
    """
    centers = np.asarray(centers, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    extents = sizes[:, :2] if yaws is None else _horizontal_extent(sizes, np.asarray(yaws))
    for k in range(1, len(centers)):
        smaller = min(extents[k - 1, 0] * extents[k - 1, 1], extents[k, 0] * extents[k, 1])
        if footprint_overlap(centers[k - 1], extents[k - 1], centers[k], extents[k]) < min_overlap * smaller:
            return False
    # support uses the bottom block's own (inscribed) footprint
    support = SUPPORT_SHRINK * sizes[0, :2] / 2.0
    if yaws is not None and yaws[0] != 0.0:
        c, s = np.cos(yaws[0]), np.sin(yaws[0])
        relative = centers[:, :2] - centers[0, :2]
        local = np.stack([c * relative[:, 0] + s * relative[:, 1],
                          -s * relative[:, 0] + c * relative[:, 1]], axis=1)
    else:
        local = centers[:, :2] - centers[0, :2]
    return bool(np.all(np.abs(local) <= support))


def normalize_tower(centers, sizes, yaws=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rescale and shift a tower into the unit cube.

    The scale is ``min(1, 1 / max_extent)``; the horizontal bounding box is
    centred on the origin and the base put on the ground plane.
    """
    centers = np.asarray(centers, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    extents = np.column_stack([
        sizes[:, :2] if yaws is None else _horizontal_extent(sizes, np.asarray(yaws)),
        sizes[:, 2],
    ])
    low = (centers - extents / 2.0).min(axis=0)
    high = (centers + extents / 2.0).max(axis=0)
    scale = min(1.0, 1.0 / float(np.max(high - low)))
    anchor = np.array([(low[0] + high[0]) / 2.0, (low[1] + high[1]) / 2.0, low[2]])
    new_centers = (centers - anchor) * scale + np.array([0.0, 0.0, GROUND_Z])
    return new_centers, sizes * scale


def _draw_offsets(rng: np.random.Generator, sizes) -> np.ndarray:
    offsets = np.zeros((len(sizes), 2))
    for k in range(1, len(sizes)):
        offsets[k, 0] = rng.normal(offsets[k - 1, 0], sizes[k - 1, 0] / 4.0)
        offsets[k, 1] = rng.normal(offsets[k - 1, 1], sizes[k - 1, 1] / 4.0)
    return offsets


def _snap_to_grid(centers, sizes, resolution: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Snap block faces onto the voxel lattice.

    Returns None when the snapped tower is taller than the grid or two
    consecutive footprints would be indistinguishable at one-cell tolerance.
    """
    cells = []
    bottom = 0
    for center, size in zip(centers, sizes):
        box = []
        for axis in (0, 1):
            low = int(np.floor((center[axis] - size[axis] / 2.0 + 0.5) * resolution + 0.5))
            high = int(np.floor((center[axis] + size[axis] / 2.0 + 0.5) * resolution + 0.5))
            high = max(high, low + MIN_GRID_CELLS)
            if high > resolution:
                low, high = low - (high - resolution), resolution
            box.append((max(low, 0), high))
        height = max(MIN_GRID_CELLS, int(np.floor(size[2] * resolution + 0.5)))
        box.append((bottom, bottom + height))
        bottom += height
        cells.append(box)
    if bottom > resolution:
        return None
    for below, above in zip(cells, cells[1:]):
        face_shift = max(abs(below[a][i] - above[a][i]) for a in (0, 1) for i in (0, 1))
        if face_shift < MIN_GRID_CELLS:
            return None
    cells = np.array(cells, dtype=float)  # (n, 3, 2)
    lows = cells[:, :, 0] / resolution - 0.5
    highs = cells[:, :, 1] / resolution - 0.5
    return (lows + highs) / 2.0, highs - lows


def sample_tower(spec: TowerSpec) -> PrimitiveObject:
    """
    Generate one tower geometry (densities unset).

    Args:
        spec: Tower parameters; ``rng_seed`` fixes the output bitwise

    Returns:
        PrimitiveObject ordered bottom to top

    Raises:
        GenerationError: no valid block placement within 100 resamples
    """
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.num_blocks
    sizes = rng.uniform(MIN_BLOCK_SIZE, MAX_BLOCK_SIZE, size=(n, 3))
    if spec.size_noise:
        sizes = sizes * rng.uniform(1.0 - spec.size_noise, 1.0 + spec.size_noise, size=(n, 3))
    yaws = None
    if spec.rotation_noise_deg:
        yaws = np.deg2rad(rng.uniform(-spec.rotation_noise_deg, spec.rotation_noise_deg, size=n))

    for _ in range(MAX_RESAMPLE_ATTEMPTS):
        offsets = _draw_offsets(rng, sizes)
        centers = stack_blocks(sizes, offsets)
        if not is_supported(centers, sizes, yaws):
            continue
        centers, scaled = normalize_tower(centers, sizes, yaws)
        if spec.grid_aligned:
            snapped = _snap_to_grid(centers, scaled, spec.resolution)
            if snapped is None:
                continue
            centers, scaled = snapped
            if not is_supported(centers, scaled):
                continue
        primitives = []
        for k in range(n):
            rotation = (1.0, 0.0, 0.0, 0.0)
            if yaws is not None:
                rotation = tuple(quat_from_axis_angle((0.0, 0.0, 1.0), yaws[k]))
            primitives.append(Primitive(
                size=tuple(np.minimum(scaled[k], 1.0)),
                translation=tuple(centers[k]),
                rotation=rotation,
            ))
        return canonical_order(primitives)

    raise GenerationError(
        f"Could not place {n} blocks after {MAX_RESAMPLE_ATTEMPTS} resamples "
        f"(seed {spec.rng_seed!r}); retry with another seed"
    )


def generate_tower(spec: TowerSpec, max_retries: int = 20) -> Tuple[PrimitiveObject, Seed]:
    """
    ``sample_tower`` with reseeding on GenerationError.

    Retry ``r`` uses the seed ``[seed, r]`` (the original seed first).

    Returns:
        Tuple of (tower, seed actually used)
    """
    base = list(np.atleast_1d(spec.rng_seed).tolist())
    last_error = None
    for retry in range(max_retries):
        seed = spec.rng_seed if retry == 0 else base + [retry]
        try:
            attempt = replace(spec, rng_seed=seed)
            return sample_tower(attempt), seed
        except GenerationError as e:
            last_error = e
    raise GenerationError(f"Tower generation failed after {max_retries} reseeds: {last_error}")


def assign_densities(tower: PrimitiveObject, seed: Seed,
                     num_configs: int = 8) -> List[PrimitiveObject]:
    """
    Draw density configurations for a tower.

    Each block first gets a material uniformly from the five, then a slot
    uniformly from that material's slots. Material labels are kept as
    ground truth on the returned objects.
    """
    if not isinstance(tower, PrimitiveObject):
        raise ValidationError("Invalid tower", [f"expected PrimitiveObject, got {type(tower).__name__}"])
    if num_configs < 1:
        raise ValidationError("Invalid density assignment", ["num_configs must be at least 1"])
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(num_configs):
        materials = []
        slots = []
        for _block in tower:
            material = MATERIALS[MATERIAL_NAMES[rng.integers(len(MATERIAL_NAMES))]]
            choices = sorted(material.slots)
            materials.append(material)
            slots.append(choices[rng.integers(len(choices))])
        configs.append(tower.with_slots(slots, materials))
    return configs
