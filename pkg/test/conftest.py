"""
Pytest configuration and fixtures for physprim tests
"""
import json

import numpy as np
import pytest

from physprim.core.primitives import Primitive, PrimitiveObject
from physprim.dataset.builder import generate_dataset
from physprim.dataset.records import load_dataset
from physprim.physics.simulator import SimConfig
from physprim.utils.config import load_experiment_config, reset_global_config, set_global_config

# short rollouts keep the suite fast; the standard 256 steps run in slow tests
FAST_STEPS = 24


@pytest.fixture(autouse=True)
def quiet_runtime():
    """Fresh runtime settings without progress bars for every test."""
    reset_global_config()
    set_global_config(progress_bar=False, max_workers=1)
    yield
    reset_global_config()


@pytest.fixture
def two_block_tower():
    """Two axis-aligned blocks resting on the ground (z = -0.5), no densities."""
    bottom = Primitive(size=(0.4, 0.4, 0.3), translation=(0.0, 0.0, -0.35))
    top = Primitive(size=(0.3, 0.3, 0.2), translation=(0.05, 0.0, -0.1))
    return PrimitiveObject((bottom, top))


@pytest.fixture
def lattice_tower():
    """Two blocks whose faces lie on the 16^3 voxel lattice."""
    bottom = Primitive(size=(0.5, 0.5, 0.25), translation=(0.0, 0.0, -0.375))
    top = Primitive(size=(0.25, 0.25, 0.25), translation=(0.0625, 0.0, -0.125))
    return PrimitiveObject((bottom, top))


@pytest.fixture
def heavy_tower(two_block_tower):
    """The two-block tower made of dense material (slow, well-behaved pushes)."""
    return two_block_tower.with_slots([80, 60], materials=['Metal', 'Ceramic'])


@pytest.fixture
def fast_sim():
    """Simulator settings with a short horizon."""
    return SimConfig(steps=FAST_STEPS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def smoke_config_data(tmp_path):
    """A tiny experiment configuration writing into ``tmp_path``."""
    return {
        "seed": 0,
        "tower": {
            "num_towers": 2,
            "num_blocks": 2,
            "num_density_configs": 2,
            "grid_aligned": True,
        },
        "sim": {"steps": 16},
        "budgets": [1, 4],
        "budget": 4,
        "mode": "phys",
        "train_split": 0.5,
        "max_tasks": 2,
        "dataset_dir": str(tmp_path / "dataset"),
        "results_path": str(tmp_path / "results.json"),
        "report_path": str(tmp_path / "report.json"),
    }


@pytest.fixture
def smoke_config_file(tmp_path, smoke_config_data):
    """The tiny experiment configuration saved as JSON."""
    path = tmp_path / "smoke.json"
    path.write_text(json.dumps(smoke_config_data))
    return path


@pytest.fixture
def smoke_config(smoke_config_file):
    """The tiny experiment configuration, loaded and validated."""
    return load_experiment_config(smoke_config_file)


@pytest.fixture
def smoke_dataset(smoke_config):
    """A generated tiny dataset, loaded from disk."""
    generate_dataset(smoke_config)
    return load_dataset(smoke_config.dataset_dir)
