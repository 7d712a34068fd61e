"""
Core domain types for physprim
"""

from .materials import (
    NUM_DENSITY_SLOTS,
    SLOT_DENSITY_UNIT,
    Material,
    MATERIALS,
    MATERIAL_NAMES,
    get_material,
    material_slots,
    slot_density,
    validate_slot,
)
from .primitives import MAX_PRIMITIVES, Primitive, PrimitiveObject, canonical_order
from .poses import (
    NUM_INTERACTIONS,
    SIMULATION_DT,
    TRAJECTORY_LENGTH,
    Pose,
    Trajectory,
    read_trajectory_csv,
    write_trajectory_csv,
)
from .priors import DensityPrior, read_prior, write_prior

__all__ = [
    'NUM_DENSITY_SLOTS',
    'SLOT_DENSITY_UNIT',
    'Material',
    'MATERIALS',
    'MATERIAL_NAMES',
    'get_material',
    'material_slots',
    'slot_density',
    'validate_slot',
    'MAX_PRIMITIVES',
    'Primitive',
    'PrimitiveObject',
    'canonical_order',
    'NUM_INTERACTIONS',
    'SIMULATION_DT',
    'TRAJECTORY_LENGTH',
    'Pose',
    'Trajectory',
    'read_trajectory_csv',
    'write_trajectory_csv',
    'DensityPrior',
    'read_prior',
    'write_prior',
]
