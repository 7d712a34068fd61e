"""
Core primitive classes - cuboids with geometry and a density slot

Objects live in the normalized object frame: the unit cube [-0.5, 0.5]^3
centered at the origin, z up, ground plane at z = -0.5. ``size`` stores full
edge lengths; the 0.5 bound applies to half-extents, so edges are at most 1.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .materials import Material, get_material, validate_slot
from ..utils.error_handling import DomainError, ValidationError
from ..utils.rotations import canonical_quaternion, quat_to_matrix

SIZE_HALF_EXTENT_LIMIT = 0.5
TRANSLATION_LIMIT = 0.5
MAX_PRIMITIVES = 8
QUATERNION_TOLERANCE = 1e-9
BOUNDS_TOLERANCE = 1e-9

Vector3 = Tuple[float, float, float]
Quaternion = Tuple[float, float, float, float]


@dataclass(frozen=True)
class Primitive:
    """One cuboid part: size, translation, rotation and optional density slot."""

    size: Vector3
    translation: Vector3 = (0.0, 0.0, 0.0)
    rotation: Quaternion = (1.0, 0.0, 0.0, 0.0)
    density_slot: Optional[int] = None

    def __post_init__(self):
        size = tuple(float(v) for v in self.size)
        translation = tuple(float(v) for v in self.translation)
        rotation = tuple(float(v) for v in self.rotation)
        if len(size) != 3 or len(translation) != 3 or len(rotation) != 4:
            raise ValidationError("Malformed primitive", [
                "size needs 3 components, translation 3, rotation 4"
            ])

        violations = []
        if any(not np.isfinite(v) for v in size + translation + rotation):
            violations.append("all parameters must be finite")
        else:
            if any(not 0.0 < s <= 2.0 * SIZE_HALF_EXTENT_LIMIT for s in size):
                violations.append(f"size {size} must satisfy 0 < s <= {2.0 * SIZE_HALF_EXTENT_LIMIT}")
            if any(abs(p) > TRANSLATION_LIMIT + BOUNDS_TOLERANCE for p in translation):
                violations.append(f"translation {translation} must satisfy |p| <= {TRANSLATION_LIMIT}")
            norm = float(np.linalg.norm(rotation))
            if norm == 0.0:
                violations.append("rotation quaternion must be non-zero")
        if violations:
            raise ValidationError("Invalid primitive", violations)

        rotation = tuple(float(v) for v in canonical_quaternion(rotation))
        slot = None if self.density_slot is None else validate_slot(self.density_slot)

        object.__setattr__(self, 'size', size)
        object.__setattr__(self, 'translation', translation)
        object.__setattr__(self, 'rotation', rotation)
        object.__setattr__(self, 'density_slot', slot)

    @property
    def volume(self) -> float:
        return float(self.size[0] * self.size[1] * self.size[2])

    @property
    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    @property
    def is_axis_aligned(self) -> bool:
        return abs(self.rotation[0] - 1.0) <= QUATERNION_TOLERANCE

    def corners(self) -> np.ndarray:
        """The eight corner points in the object frame, shape (8, 3)."""
        half = 0.5 * np.asarray(self.size)
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
        return signs * half @ self.rotation_matrix.T + np.asarray(self.translation)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Axis-aligned bounding box (lower, upper) in the object frame."""
        corners = self.corners()
        return corners.min(axis=0), corners.max(axis=0)

    def contains(self, points) -> np.ndarray:
        """Boolean mask of points (N, 3) inside the (closed) cuboid."""
        local = (np.asarray(points, dtype=float) - np.asarray(self.translation)) @ self.rotation_matrix
        return np.all(np.abs(local) <= 0.5 * np.asarray(self.size), axis=-1)

    def with_density(self, slot: Optional[int]) -> "Primitive":
        return replace(self, density_slot=slot)

    def to_dict(self) -> Dict:
        return {
            'size': list(self.size),
            'translation': list(self.translation),
            'rotation': list(self.rotation),
            'density_slot': self.density_slot,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Primitive":
        try:
            return cls(
                size=tuple(data['size']),
                translation=tuple(data.get('translation', (0.0, 0.0, 0.0))),
                rotation=tuple(data.get('rotation', (1.0, 0.0, 0.0, 0.0))),
                density_slot=data.get('density_slot'),
            )
        except KeyError as e:
            raise ValidationError("Malformed primitive record", [f"missing field {e}"])


def _order_key(primitive: Primitive) -> Tuple[float, float, float]:
    px, py, pz = primitive.translation
    return (pz, px, py)


@dataclass(frozen=True)
class PrimitiveObject:
    """Ordered primitives (bottom to top) with optional per-primitive materials."""

    primitives: Tuple[Primitive, ...]
    materials: Optional[Tuple[Material, ...]] = None

    def __post_init__(self):
        primitives = tuple(self.primitives)
        violations = []
        if not 1 <= len(primitives) <= MAX_PRIMITIVES:
            violations.append(f"primitive count {len(primitives)} outside 1..{MAX_PRIMITIVES}")
        if any(not isinstance(p, Primitive) for p in primitives):
            violations.append("every entry must be a Primitive")
        keys = [_order_key(p) for p in primitives if isinstance(p, Primitive)]
        if any(keys[i] > keys[i + 1] for i in range(len(keys) - 1)):
            violations.append("primitives must be ordered bottom-to-top by (z, x, y)")
        materials = None
        if self.materials is not None:
            materials = tuple(get_material(m) for m in self.materials)
            if len(materials) != len(primitives):
                violations.append(f"{len(materials)} material labels for {len(primitives)} primitives")
        if violations:
            raise ValidationError("Invalid primitive object", violations)
        object.__setattr__(self, 'primitives', primitives)
        object.__setattr__(self, 'materials', materials)

    def __len__(self):
        return len(self.primitives)

    def __iter__(self):
        return iter(self.primitives)

    def __getitem__(self, index):
        return self.primitives[index]

    @property
    def slots(self) -> Optional[Tuple[int, ...]]:
        """Density slots in order, or None when any primitive has no density."""
        slots = tuple(p.density_slot for p in self.primitives)
        if any(s is None for s in slots):
            return None
        return slots

    @property
    def has_densities(self) -> bool:
        return self.slots is not None

    def with_slots(self, slots: Sequence[int], materials: Optional[Sequence] = None) -> "PrimitiveObject":
        if len(slots) != len(self.primitives):
            raise DomainError(f"{len(slots)} slots for {len(self.primitives)} primitives")
        return PrimitiveObject(
            tuple(p.with_density(int(s)) for p, s in zip(self.primitives, slots)),
            materials=tuple(materials) if materials is not None else self.materials,
        )

    def geometry_only(self) -> "PrimitiveObject":
        return PrimitiveObject(tuple(p.with_density(None) for p in self.primitives))

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lows, highs = zip(*(p.bounds() for p in self.primitives))
        return np.min(lows, axis=0), np.max(highs, axis=0)

    def fits_unit_cube(self, tolerance: float = BOUNDS_TOLERANCE) -> bool:
        low, high = self.bounds()
        return bool(np.all(low >= -0.5 - tolerance) and np.all(high <= 0.5 + tolerance))

    def corners(self) -> np.ndarray:
        """All primitive corners stacked, shape (8 * n, 3)."""
        return np.vstack([p.corners() for p in self.primitives])

    def to_dict(self) -> Dict:
        data = {'primitives': [p.to_dict() for p in self.primitives]}
        for entry, primitive_data in zip(self.materials or (), data['primitives']):
            primitive_data['material'] = entry.name
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "PrimitiveObject":
        records = data.get('primitives')
        if not records:
            raise ValidationError("Malformed object record", ["missing or empty 'primitives'"])
        primitives = [Primitive.from_dict(record) for record in records]
        labels = [record.get('material') for record in records]
        materials = labels if all(label is not None for label in labels) else None
        return cls(tuple(primitives), materials=tuple(materials) if materials else None)


def canonical_order(primitives: Iterable[Primitive],
                    materials: Optional[Sequence] = None) -> PrimitiveObject:
    """
    Sort primitives bottom-to-top into a PrimitiveObject.

    The sort is stable on the key (z, x, y) of each translation. Material
    labels, when given, travel with their primitives.
    """
    primitives = list(primitives)
    if not primitives:
        raise ValidationError("Cannot order an empty primitive list", ["at least one primitive required"])
    for index, primitive in enumerate(primitives):
        if not isinstance(primitive, Primitive):
            raise ValidationError("Invalid primitive", [f"entry {index} is {type(primitive).__name__}, not Primitive"])
    order = sorted(range(len(primitives)), key=lambda i: _order_key(primitives[i]))
    ordered_materials = None
    if materials is not None:
        materials = list(materials)
        if len(materials) != len(primitives):
            raise ValidationError("Invalid material labels", [f"{len(materials)} labels for {len(primitives)} primitives"])
        ordered_materials = tuple(materials[i] for i in order)
    return PrimitiveObject(tuple(primitives[i] for i in order), materials=ordered_materials)
