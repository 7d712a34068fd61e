"""
The four canonical physics interactions

Each interaction pushes the object with a force of 1e5 N from a source
position at (±1, -1, ±1) towards the object's centre of mass. The force
acts for one simulation step, i.e. as the impulse ``J = F * dt``.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from ..core.poses import NUM_INTERACTIONS, SIMULATION_DT
from ..core.primitives import Primitive, PrimitiveObject
from ..utils.error_handling import DomainError

FORCE_MAGNITUDE = 1e5

INTERACTION_SOURCES: Tuple[Tuple[float, float, float], ...] = (
    (1.0, -1.0, 1.0),
    (-1.0, -1.0, 1.0),
    (1.0, -1.0, -1.0),
    (-1.0, -1.0, -1.0),
)

PARALLEL_TOLERANCE = 1e-15


def ray_box_entries(origins, directions, primitive: Primitive) -> np.ndarray:
    """
    Distances along unit rays (B, 3) to the first surface point of a cuboid.

    NaN where a ray misses or starts inside the box.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    rotation = primitive.rotation_matrix
    relative = origins - np.asarray(primitive.translation, dtype=float)
    half = 0.5 * np.asarray(primitive.size, dtype=float)

    t_near = np.full(len(directions), -np.inf)
    t_far = np.full(len(directions), np.inf)
    miss = np.zeros(len(directions), dtype=bool)
    for axis in range(3):
        column = rotation[:, axis]
        local_origin = relative[:, 0] * column[0] + relative[:, 1] * column[1] + relative[:, 2] * column[2]
        local_direction = directions[:, 0] * column[0] + directions[:, 1] * column[1] + directions[:, 2] * column[2]
        parallel = np.abs(local_direction) < PARALLEL_TOLERANCE
        miss |= parallel & (np.abs(local_origin) > half[axis])
        safe = np.where(parallel, 1.0, local_direction)
        t1 = (-half[axis] - local_origin) / safe
        t2 = (half[axis] - local_origin) / safe
        t_near = np.where(parallel, t_near, np.maximum(t_near, np.minimum(t1, t2)))
        t_far = np.where(parallel, t_far, np.minimum(t_far, np.maximum(t1, t2)))
    miss |= (t_near > t_far) | (t_far < 0.0) | (t_near < 0.0)
    return np.where(miss, np.nan, t_near)


def ray_box_entry(origin, direction, primitive: Primitive) -> Optional[float]:
    """
    Distance along a unit ray to the first surface point of a cuboid.

    Returns None when the ray misses or starts inside the box.
    """
    t = float(ray_box_entries(origin, direction, primitive)[0])
    return None if np.isnan(t) else t


def push_directions(sources, centers_of_mass) -> np.ndarray:
    """Unit vectors (B, 3) from each source towards its centre of mass."""
    offset = np.atleast_2d(np.asarray(centers_of_mass, dtype=float)) - np.atleast_2d(sources)
    norm = np.sqrt(offset[:, 0] * offset[:, 0] + offset[:, 1] * offset[:, 1] + offset[:, 2] * offset[:, 2])
    return offset / norm[:, np.newaxis]


def push_impulses(geometry: PrimitiveObject, centers_of_mass, interaction_ids,
                  force_magnitude: float = FORCE_MAGNITUDE,
                  dt: float = SIMULATION_DT) -> Tuple[np.ndarray, np.ndarray]:
    """
    Impulses and application points of many pushes on one geometry.

    Args:
        geometry: Primitives the rays are cast against
        centers_of_mass: (B, 3) centres of mass the pushes aim at
        interaction_ids: (B,) interaction index of each push
        force_magnitude: Force in N, applied for one step ``dt``

    Returns:
        Tuple of impulses (B, 3) and world application points (B, 3). A ray
        that hits no primitive is applied at the centre of mass.
    """
    centers_of_mass = np.atleast_2d(np.asarray(centers_of_mass, dtype=float))
    ids = np.asarray(interaction_ids, dtype=int).reshape(-1)
    if np.any((ids < 0) | (ids >= NUM_INTERACTIONS)):
        raise DomainError(f"Interaction indices must be in 0..{NUM_INTERACTIONS - 1}")
    sources = np.asarray(INTERACTION_SOURCES, dtype=float)[ids]
    directions = push_directions(sources, centers_of_mass)

    nearest = np.full(len(ids), np.inf)
    for primitive in geometry.primitives:
        entry = ray_box_entries(sources, directions, primitive)
        nearest = np.where(np.isnan(entry), nearest, np.minimum(nearest, entry))
    hit = np.isfinite(nearest)
    points = np.where(hit[:, np.newaxis], sources + np.where(hit, nearest, 0.0)[:, np.newaxis] * directions,
                      centers_of_mass)
    return force_magnitude * dt * directions, points


@dataclass(frozen=True)
class Interaction:
    """A canonical push, identified by its index 0..3."""

    index: int
    force_magnitude: float = FORCE_MAGNITUDE

    def __post_init__(self):
        if not isinstance(self.index, (int, np.integer)) or not 0 <= self.index < NUM_INTERACTIONS:
            raise DomainError(f"Interaction index must be in 0..{NUM_INTERACTIONS - 1}, got {self.index!r}")
        if not self.force_magnitude >= 0.0:
            raise DomainError(f"Force magnitude must be non-negative, got {self.force_magnitude}")

    @property
    def source(self) -> np.ndarray:
        return np.array(INTERACTION_SOURCES[self.index])

    def direction(self, center_of_mass) -> np.ndarray:
        return push_directions(self.source, center_of_mass)[0]

    def impulse(self, center_of_mass, dt: float = SIMULATION_DT) -> np.ndarray:
        return self.force_magnitude * dt * self.direction(center_of_mass)

    def application_point(self, obj: PrimitiveObject, center_of_mass) -> np.ndarray:
        """First point where the ray from the source towards the COM meets the object surface."""
        _, points = push_impulses(obj, center_of_mass, [self.index], self.force_magnitude)
        return points[0]


def canonical_interactions(force_magnitude: float = FORCE_MAGNITUDE):
    return [Interaction(index, force_magnitude) for index in range(NUM_INTERACTIONS)]


def as_interaction(value: Union[int, Interaction, None]) -> Optional[Interaction]:
    if value is None or isinstance(value, Interaction):
        return value
    return Interaction(int(value))
