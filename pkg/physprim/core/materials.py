"""
Density slots and the material table

Density is discretized into 100 slots; slot ``i`` stands for ``i * 100``
kg/m^3. This module is the single source of density units.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Tuple, Union

from ..utils.error_handling import DomainError

NUM_DENSITY_SLOTS = 100
SLOT_DENSITY_UNIT = 100.0  # kg/m^3 per slot


def validate_slot(slot) -> int:
    """Return ``slot`` as an int, raising DomainError when outside 1..100."""
    if isinstance(slot, bool) or int(slot) != slot:
        raise DomainError(f"Density slot must be an integer, got {slot!r}")
    slot = int(slot)
    if not 1 <= slot <= NUM_DENSITY_SLOTS:
        raise DomainError(f"Density slot {slot} outside 1..{NUM_DENSITY_SLOTS}")
    return slot


def slot_density(slot: int) -> float:
    """Physical density (kg/m^3) of a density slot."""
    return validate_slot(slot) * SLOT_DENSITY_UNIT


@dataclass(frozen=True)
class Material:
    """A named material and the inclusive slot intervals it may take."""

    name: str
    slot_ranges: Tuple[Tuple[int, int], ...]

    @property
    def slots(self) -> FrozenSet[int]:
        return frozenset(
            slot for low, high in self.slot_ranges for slot in range(low, high + 1)
        )

    def __repr__(self):
        ranges = " ∪ ".join(f"[{low},{high}]" for low, high in self.slot_ranges)
        return f"Material('{self.name}', {ranges})"


WOOD = Material("Wood", ((1, 10),))
BRICK = Material("Brick", ((11, 20),))
STONE = Material("Stone", ((21, 30),))
CERAMIC = Material("Ceramic", ((31, 60),))
METAL = Material("Metal", ((21, 35), (71, 100)))

MATERIALS: Dict[str, Material] = {
    material.name: material for material in (WOOD, BRICK, STONE, CERAMIC, METAL)
}
MATERIAL_NAMES: Tuple[str, ...] = tuple(MATERIALS)


def get_material(material: Union[str, Material]) -> Material:
    """Look up a material by (case-insensitive) name."""
    if isinstance(material, Material):
        return material
    for name, entry in MATERIALS.items():
        if str(material).lower() == name.lower():
            return entry
    raise DomainError(f"Unknown material '{material}'. Available materials: {list(MATERIALS)}")


def material_slots(material: Union[str, Material]) -> FrozenSet[int]:
    """The set of density slots a material may take."""
    return get_material(material).slots
