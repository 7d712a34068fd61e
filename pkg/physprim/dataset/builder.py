"""
Synthetic dataset generation: towers, voxels, density configurations and
their four interaction trajectories
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .records import INDEX_FILE, MANIFEST_FILE, TRAJECTORY_DIR, VOXEL_DIR, DatasetRecord
from ..core.poses import write_trajectory_csv
from ..physics.interactions import FORCE_MAGNITUDE
from ..physics.simulator import simulate_all
from ..towers.generator import assign_densities, generate_tower
from ..utils.batch_processing import parallel_map
from ..utils.config import ExperimentConfig
from ..utils.data_processing import write_json, write_jsonl
from ..voxels.binvox import save_binvox
from ..voxels.grid import voxelize

RNG_ALGORITHM = 'PCG64'


def tower_block_count(config: ExperimentConfig, tower_index: int) -> int:
    """Block count of one tower; a list setting is sampled per tower."""
    choices = config.tower.num_blocks
    if isinstance(choices, int):
        return choices
    rng = np.random.default_rng([config.seed, tower_index, 0])
    return int(choices[rng.integers(len(choices))])


def tower_split(config: ExperimentConfig, tower_index: int) -> str:
    """Whole towers go to one split, so test geometry never appears in training."""
    u = np.random.default_rng([config.seed, tower_index, 2]).random()
    return 'train' if u < config.train_split else 'test'


def _build_tower(config: ExperimentConfig, root: Path, tower_index: int) -> List[DatasetRecord]:
    sim_config = config.sim_config()
    spec = config.tower_spec(tower_block_count(config, tower_index), rng_seed=[config.seed, tower_index])
    tower, used_seed = generate_tower(spec)

    voxel_path = f"{VOXEL_DIR}/tower_{tower_index:04d}.binvox"
    save_binvox(voxelize(tower, config.resolution), root / voxel_path)

    split = tower_split(config, tower_index)
    configs = assign_densities(tower, seed=[config.seed, tower_index, 1],
                               num_configs=config.tower.num_density_configs)
    records = []
    for config_index, obj in enumerate(configs):
        record_id = f"t{tower_index:04d}_c{config_index:02d}"
        trajectories = simulate_all(obj, sim_config, FORCE_MAGNITUDE)
        paths = []
        for trajectory in trajectories:
            path = f"{TRAJECTORY_DIR}/{record_id}_i{trajectory.interaction_id}.csv"
            write_trajectory_csv(trajectory, root / path)
            paths.append(path)
        records.append(DatasetRecord(
            record_id=record_id,
            tower_index=tower_index,
            config_index=config_index,
            seed=tuple(np.atleast_1d(used_seed).tolist()),
            split=split,
            object=obj,
            voxel_path=voxel_path,
            trajectory_paths=tuple(paths),
        ))
    return records


def build_manifest(config: ExperimentConfig, num_records: int) -> Dict[str, Any]:
    from .. import __version__

    return {
        'tool': 'physprim',
        'version': __version__,
        'config': config.to_dict(),
        'sim': config.sim_config().to_dict(),
        'force_magnitude': FORCE_MAGNITUDE,
        'resolution': config.resolution,
        'rng': {'algorithm': RNG_ALGORITHM, 'numpy': np.__version__},
        'num_records': num_records,
    }


def generate_dataset(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None,
                     max_workers: Optional[int] = None, verbose: bool = False) -> Dict[str, Any]:
    """
    Generate a dataset directory from an experiment configuration.

    Every tower is generated, voxelized and simulated independently of the
    others, so the files do not depend on the number of workers. Files are
    written atomically; the index and manifest come last.

    Args:
        config: Experiment configuration (tower settings, seed, simulator)
        out_dir: Output directory (``config.dataset_dir`` if None)
        max_workers: Worker threads across towers
        verbose: Print progress information

    Returns:
        The manifest written to ``manifest.json``

    Raises:
        GenerationError: a tower could not be placed after all reseeds
        SimulationError: a ground-truth rollout diverged
    """
    root = Path(out_dir if out_dir is not None else config.dataset_dir)
    root.mkdir(parents=True, exist_ok=True)
    num_towers = config.tower.num_towers

    if verbose:
        print(f"🔄 Generating {num_towers} towers × {config.tower.num_density_configs} "
              f"density configurations into {root}")

    per_tower = parallel_map(lambda index: _build_tower(config, root, index), range(num_towers),
                             max_workers=max_workers, desc="Generating towers")
    records = [record for tower_records in per_tower for record in tower_records]

    write_jsonl(root / INDEX_FILE, (record.to_dict() for record in records))
    manifest = build_manifest(config, len(records))
    write_json(root / MANIFEST_FILE, manifest)

    if verbose:
        train = sum(1 for r in records if r.split == 'train')
        print(f"💾 Wrote {len(records)} records ({train} train, {len(records) - train} test) to {root}")
    return manifest
