"""
Rigid-body physics: mass properties, interactions and the simulator
"""

from .mass import MassProperties, batch_mass_properties, cuboid_inertia, mass_properties, shift_inertia
from .interactions import (
    FORCE_MAGNITUDE,
    INTERACTION_SOURCES,
    Interaction,
    canonical_interactions,
    push_impulses,
)
from .simulator import RigidBodyBatch, RigidBodySimulation, SimConfig, simulate, simulate_all

__all__ = [
    'MassProperties',
    'batch_mass_properties',
    'cuboid_inertia',
    'mass_properties',
    'shift_inertia',
    'FORCE_MAGNITUDE',
    'INTERACTION_SOURCES',
    'Interaction',
    'canonical_interactions',
    'push_impulses',
    'RigidBodyBatch',
    'RigidBodySimulation',
    'SimConfig',
    'simulate',
    'simulate_all',
]
