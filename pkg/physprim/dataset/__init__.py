"""
Dataset generation and loading
"""

from .builder import build_manifest, generate_dataset, tower_block_count, tower_split
from .records import Dataset, DatasetRecord, load_dataset

__all__ = [
    'build_manifest',
    'generate_dataset',
    'tower_block_count',
    'tower_split',
    'Dataset',
    'DatasetRecord',
    'load_dataset',
]
