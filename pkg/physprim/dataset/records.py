"""
Dataset records and the JSON-lines index

A dataset directory holds ``manifest.json``, ``index.jsonl`` (one record
per tower and density configuration), ``voxels/*.binvox`` (one per tower)
and ``trajectories/*.csv`` (four per record).
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ..core.poses import NUM_INTERACTIONS, Trajectory, read_trajectory_csv
from ..core.primitives import PrimitiveObject
from ..utils.data_processing import iter_jsonl, read_json
from ..utils.error_handling import DataError, DomainError
from ..voxels.binvox import load_binvox
from ..voxels.grid import VoxelGrid

INDEX_FILE = 'index.jsonl'
MANIFEST_FILE = 'manifest.json'
VOXEL_DIR = 'voxels'
TRAJECTORY_DIR = 'trajectories'
SPLITS = ('train', 'test')


@dataclass(frozen=True)
class DatasetRecord:
    """One (tower, density configuration) sample."""

    record_id: str
    tower_index: int
    config_index: int
    seed: Tuple[int, ...]
    split: str
    object: PrimitiveObject
    voxel_path: str
    trajectory_paths: Tuple[str, ...]

    @property
    def num_blocks(self) -> int:
        return len(self.object)

    @property
    def slots(self) -> Tuple[int, ...]:
        return self.object.slots

    @property
    def materials(self) -> Optional[Tuple[str, ...]]:
        if self.object.materials is None:
            return None
        return tuple(m.name for m in self.object.materials)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'record_id': self.record_id,
            'tower_index': self.tower_index,
            'config_index': self.config_index,
            'seed': list(self.seed),
            'split': self.split,
            'num_blocks': self.num_blocks,
            'slots': list(self.slots),
            'materials': list(self.materials or []),
            'object': self.object.to_dict(),
            'voxels': self.voxel_path,
            'trajectories': list(self.trajectory_paths),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetRecord":
        try:
            record = cls(
                record_id=str(data['record_id']),
                tower_index=int(data['tower_index']),
                config_index=int(data['config_index']),
                seed=tuple(int(s) for s in data['seed']),
                split=str(data['split']),
                object=PrimitiveObject.from_dict(data['object']),
                voxel_path=str(data['voxels']),
                trajectory_paths=tuple(str(p) for p in data['trajectories']),
            )
        except KeyError as e:
            raise DomainError(f"missing field {e}")
        except (TypeError, ValueError) as e:
            raise DomainError(str(e))
        if record.split not in SPLITS:
            raise DomainError(f"split must be one of {SPLITS}, got '{record.split}'")
        if len(record.trajectory_paths) != NUM_INTERACTIONS:
            raise DomainError(f"expected {NUM_INTERACTIONS} trajectory files, got {len(record.trajectory_paths)}")
        if not record.object.has_densities:
            raise DomainError("record object has no density slots")
        return record


class Dataset:
    """A loaded dataset directory: manifest plus records, files read lazily."""

    def __init__(self, root: Union[str, Path], manifest: Dict[str, Any], records: List[DatasetRecord]):
        self.root = Path(root)
        self.manifest = manifest
        self.records = records

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __repr__(self):
        return f"Dataset({self.root}, {len(self)} records)"

    def split(self, name: str) -> List[DatasetRecord]:
        return [r for r in self.records if r.split == name]

    def get(self, record_id: str) -> DatasetRecord:
        for record in self.records:
            if record.record_id == record_id:
                return record
        raise DataError(f"Unknown record '{record_id}'", path=str(self.root / INDEX_FILE))

    @property
    def trajectory_length(self) -> Optional[int]:
        steps = self.manifest.get('sim', {}).get('steps')
        return int(steps) if steps is not None else None

    def observations(self, record: DatasetRecord) -> List[Trajectory]:
        return [
            read_trajectory_csv(self.root / path, interaction_id=k, expected_length=self.trajectory_length)
            for k, path in enumerate(record.trajectory_paths)
        ]

    def voxels(self, record: DatasetRecord) -> VoxelGrid:
        return load_binvox(self.root / record.voxel_path)


def load_dataset(root: Union[str, Path]) -> Dataset:
    """
    Read ``manifest.json`` and ``index.jsonl`` from a dataset directory.

    Raises:
        DataError: missing files or a malformed record (with its line number)
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError("Dataset directory not found", path=str(root))
    manifest = read_json(root / MANIFEST_FILE)
    index_path = root / INDEX_FILE
    records = []
    line_number = 0
    for line_number, data in enumerate(iter_jsonl(index_path), start=1):
        try:
            records.append(DatasetRecord.from_dict(data))
        except DomainError as e:
            raise DataError(f"Malformed record: {e}", path=str(index_path), line=_line_of(index_path, line_number))
    if not records:
        raise DataError("Dataset index has no records", path=str(index_path))
    return Dataset(root, manifest, records)


def _line_of(path: Path, record_number: int) -> int:
    """File line holding the ``record_number``-th non-blank record."""
    with open(path, 'r', encoding='utf-8') as f:
        seen = 0
        for line_number, line in enumerate(f, start=1):
            if line.strip():
                seen += 1
                if seen == record_number:
                    return line_number
    return record_number
