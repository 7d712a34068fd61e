"""
Voxel grids and the binvox format
"""

from .grid import VoxelGrid, cell_centers, voxel_bounds, voxelize
from .binvox import encode_runs, load_binvox, read_binvox, save_binvox, write_binvox

__all__ = [
    'VoxelGrid',
    'cell_centers',
    'voxel_bounds',
    'voxelize',
    'encode_runs',
    'load_binvox',
    'read_binvox',
    'save_binvox',
    'write_binvox',
]
