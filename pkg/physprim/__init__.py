"""
physprim: physical primitive decomposition toolkit
Cuboid parts with geometry and density, a rigid-body simulator, and
sample-simulate-select density inference from pushed-object trajectories
"""

__version__ = "0.1.0"
__author__ = "physprim developers"

from typing import Optional

# Core imports - always available
from .core.materials import MATERIALS, Material, get_material, material_slots, slot_density
from .core.primitives import Primitive, PrimitiveObject, canonical_order
from .core.poses import Pose, Trajectory, read_trajectory_csv, write_trajectory_csv
from .core.priors import DensityPrior, read_prior, write_prior

# Geometry, physics and inference
from .towers.generator import TowerSpec, assign_densities, generate_tower
from .voxels.grid import VoxelGrid, voxelize
from .voxels.binvox import load_binvox, read_binvox, save_binvox, write_binvox
from .physics.mass import MassProperties, mass_properties
from .physics.simulator import SimConfig, simulate, simulate_all
from .shapefit.fitting import FitConfig, fit_primitives
from .shapefit.scoring import cuboid_iou, f1_score
from .inference.search import (
    Candidate,
    InferenceTask,
    infer_exhaustive,
    infer_sampled,
    infer_with_shape,
)
from .inference.distance import trajectory_distance

# Configuration and errors
from .utils.config import ExperimentConfig, get_global_config, load_experiment_config, set_global_config
from .utils.error_handling import PhysPrimError


def tower(num_blocks: int = 2, seed=0, grid_aligned: bool = False) -> PrimitiveObject:
    """Generate one geometry-only tower."""
    generated, _ = generate_tower(TowerSpec(num_blocks=num_blocks, rng_seed=seed, grid_aligned=grid_aligned))
    return generated


def inference_task(obj: PrimitiveObject, budget=64, sim_config: Optional[SimConfig] = None,
                   prior: Optional[DensityPrior] = None) -> InferenceTask:
    """Simulate ``obj`` under the four interactions and wrap the result as an inference task."""
    sim_config = sim_config or SimConfig()
    observations = tuple(simulate_all(obj, sim_config))
    return InferenceTask(obj.geometry_only(), observations, prior=prior, budget=budget, sim_config=sim_config)


def info():
    """Display package capabilities."""
    print(f"📦 physprim v{__version__}")
    print(f"🎯 Core Focus: objects as cuboid parts with geometry and density")
    print(f"")
    print(f"🛠️ Core Capabilities:")
    print(f"   ✅ Block-tower generation with density configurations")
    print(f"   ✅ Voxelization and binvox I/O")
    print(f"   ✅ Rigid-body simulation of four canonical pushes (300 Hz, ground contact)")
    print(f"   ✅ Cuboid fitting from voxels, IoU and F1 scoring")
    print(f"   ✅ Density inference: sampled, exhaustive, and shape+physics")
    print(f"   ✅ Baselines, top-k accuracy, RMSE and budget sweeps")
    print(f"   ✅ Trajectory extraction from 2D keypoints (matching + PnP)")
    print(f"")
    print(f"⚙️ Runtime settings: {get_global_config()}")


__all__ = [
    # Core types
    'MATERIALS', 'Material', 'get_material', 'material_slots', 'slot_density',
    'Primitive', 'PrimitiveObject', 'canonical_order',
    'Pose', 'Trajectory', 'read_trajectory_csv', 'write_trajectory_csv',
    'DensityPrior', 'read_prior', 'write_prior',
    # Geometry and physics
    'TowerSpec', 'assign_densities', 'generate_tower',
    'VoxelGrid', 'voxelize', 'load_binvox', 'read_binvox', 'save_binvox', 'write_binvox',
    'MassProperties', 'mass_properties',
    'SimConfig', 'simulate', 'simulate_all',
    'FitConfig', 'fit_primitives', 'cuboid_iou', 'f1_score',
    # Inference
    'Candidate', 'InferenceTask', 'infer_exhaustive', 'infer_sampled', 'infer_with_shape',
    'trajectory_distance',
    # Configuration
    'ExperimentConfig', 'get_global_config', 'load_experiment_config', 'set_global_config',
    'PhysPrimError',
    # Factory functions
    'tower', 'inference_task', 'info',
]
