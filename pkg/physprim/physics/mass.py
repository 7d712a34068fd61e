"""
Mass properties of composite cuboid objects
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.materials import SLOT_DENSITY_UNIT, validate_slot
from ..core.primitives import Primitive, PrimitiveObject
from ..utils.error_handling import DomainError, ValidationError


@dataclass(frozen=True, eq=False)
class MassProperties:
    """Total mass (kg), centre of mass (m) and inertia tensor about the COM (kg m^2)."""

    mass: float
    center_of_mass: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        violations = []
        if not self.mass > 0:
            violations.append(f"mass must be positive, got {self.mass}")
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape != (3, 3) or not np.allclose(inertia, inertia.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(inertia).max())):
            violations.append("inertia must be a symmetric 3x3 matrix")
        if violations:
            raise ValidationError("Invalid mass properties", violations)

    @property
    def principal_moments(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.inertia)

    def is_physical(self, tolerance: float = 1e-9) -> bool:
        """Positive definite with principal moments obeying the triangle inequality."""
        moments = self.principal_moments
        scale = tolerance * max(1.0, float(moments.max()))
        if moments.min() <= 0.0:
            return False
        i1, i2, i3 = moments
        return bool(i1 <= i2 + i3 + scale and i2 <= i1 + i3 + scale and i3 <= i1 + i2 + scale)

    def as_tuple(self) -> Tuple[float, Tuple[float, ...], Tuple[float, ...]]:
        return (self.mass, tuple(self.center_of_mass.tolist()), tuple(self.inertia.ravel().tolist()))


def cuboid_inertia(mass: float, size) -> np.ndarray:
    """Inertia of a solid cuboid about its centre, in its own axes."""
    sx, sy, sz = size
    return (mass / 12.0) * np.diag([sy * sy + sz * sz, sx * sx + sz * sz, sx * sx + sy * sy])


def shift_inertia(inertia, mass: float, offset) -> np.ndarray:
    """Parallel-axis shift of an inertia tensor by ``offset`` from the body's COM."""
    offset = np.asarray(offset, dtype=float)
    return inertia + mass * (np.dot(offset, offset) * np.eye(3) - np.outer(offset, offset))


def _primitive_volume(primitive: Primitive) -> float:
    if primitive.volume <= 0.0:
        raise DomainError(f"Primitive with size {primitive.size} has zero volume")
    return primitive.volume


def batch_mass_properties(geometry: PrimitiveObject, slot_vectors) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Mass properties of one geometry under many density assignments.

    Args:
        geometry: Primitives; their own density slots are ignored
        slot_vectors: (B, K) density slots, one row per assignment

    Returns:
        Tuple of masses (B,), centres of mass (B, 3) and inertia tensors
        about the COM (B, 3, 3). Every row is computed elementwise, so a
        row's values do not depend on the other rows.
    """
    slots = np.asarray(slot_vectors)
    if slots.ndim != 2 or slots.shape[1] != len(geometry):
        raise DomainError(f"Expected slot vectors of shape (B, {len(geometry)}), got {slots.shape}")
    slots = np.array([[validate_slot(s) for s in row] for row in slots], dtype=float).reshape(slots.shape)
    volumes = [_primitive_volume(p) for p in geometry.primitives]
    masses = [slots[:, k] * SLOT_DENSITY_UNIT * volume for k, volume in enumerate(volumes)]
    centers = [np.asarray(p.translation, dtype=float) for p in geometry.primitives]

    mass = masses[0]
    weighted = masses[0][:, np.newaxis] * centers[0]
    for m_k, c_k in zip(masses[1:], centers[1:]):
        mass = mass + m_k
        weighted = weighted + m_k[:, np.newaxis] * c_k
    com = weighted / mass[:, np.newaxis]

    inertia = np.zeros((len(mass), 3, 3))
    for primitive, m_k, c_k in zip(geometry.primitives, masses, centers):
        rotation = primitive.rotation_matrix
        unit = rotation @ cuboid_inertia(1.0, primitive.size) @ rotation.T
        offset = c_k - com
        squared = offset[:, 0] * offset[:, 0] + offset[:, 1] * offset[:, 1] + offset[:, 2] * offset[:, 2]
        shift = squared[:, np.newaxis, np.newaxis] * np.eye(3) - offset[:, :, np.newaxis] * offset[:, np.newaxis, :]
        inertia = inertia + m_k[:, np.newaxis, np.newaxis] * (unit + shift)
    inertia = 0.5 * (inertia + inertia.transpose(0, 2, 1))
    return mass, com, inertia


def mass_properties(obj: PrimitiveObject) -> MassProperties:
    """
    Aggregate mass properties of a composite object.

    Args:
        obj: Object whose primitives all carry density slots

    Returns:
        MassProperties in the object frame
    """
    if not obj.has_densities:
        raise DomainError("Mass properties need a density slot on every primitive")
    mass, com, inertia = batch_mass_properties(obj, [obj.slots])
    return MassProperties(float(mass[0]), com[0], inertia[0])
