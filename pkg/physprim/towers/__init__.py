"""
Synthetic block-tower generation
"""

from .generator import (
    TowerSpec,
    assign_densities,
    generate_tower,
    is_supported,
    normalize_tower,
    sample_tower,
    stack_blocks,
)

__all__ = [
    'TowerSpec',
    'assign_densities',
    'generate_tower',
    'is_supported',
    'normalize_tower',
    'sample_tower',
    'stack_blocks',
]
