"""
Configuration management for physprim

Two layers: process-wide runtime settings (worker count, progress bars)
kept in a global dict, and experiment configurations loaded from one
human-editable JSON file. Experiment precedence is built-in defaults, then
the config file, then explicit overrides (CLI flags).
"""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .error_handling import ConfigError, validate_inputs


# Global configuration storage
_GLOBAL_CONFIG = {
    'max_workers': 4,
    'progress_bar': True,
    'verbose': False,
    'voxel_resolution': 32,
    'ranking_keep': 32,
}

_DEFAULT_GLOBAL_CONFIG = dict(_GLOBAL_CONFIG)


def set_global_config(**config_params) -> Dict[str, Any]:
    """
    Set global configuration parameters for the library.

    Args:
        **config_params: Configuration parameters to set

    Returns:
        Updated configuration dictionary
    """
    global _GLOBAL_CONFIG

    unknown = set(config_params) - set(_DEFAULT_GLOBAL_CONFIG)
    if unknown:
        raise ConfigError(f"Unknown global settings: {sorted(unknown)}")
    _GLOBAL_CONFIG.update(config_params)
    return _GLOBAL_CONFIG.copy()


def get_global_config(key: Optional[str] = None) -> Union[Any, Dict[str, Any]]:
    """
    Get global configuration parameters.

    Args:
        key: Specific configuration key (None for all)

    Returns:
        Configuration value or full configuration
    """
    if key is None:
        return _GLOBAL_CONFIG.copy()
    return _GLOBAL_CONFIG.get(key)


def reset_global_config() -> Dict[str, Any]:
    """Restore the built-in runtime settings."""
    _GLOBAL_CONFIG.clear()
    _GLOBAL_CONFIG.update(_DEFAULT_GLOBAL_CONFIG)
    return _GLOBAL_CONFIG.copy()


@dataclass
class GenerationSettings:
    num_towers: int = 10
    num_blocks: Union[int, List[int]] = field(default_factory=lambda: [2, 3, 4, 5])
    num_density_configs: int = 8
    grid_aligned: bool = False
    size_noise: float = 0.0
    rotation_noise_deg: float = 0.0


@dataclass
class ExperimentConfig:
    """Everything a reproducible gen -> infer -> eval run needs."""

    seed: int = 0
    tower: GenerationSettings = field(default_factory=GenerationSettings)
    sim: Dict[str, Any] = field(default_factory=dict)
    budgets: List[Union[int, str]] = field(default_factory=lambda: [1, 8, 64, 512])
    budget: Union[int, str] = 64
    mode: str = 'phys'
    distance: str = 'mse'
    stride: int = 1
    known_shape: bool = False
    resolution: int = 32
    train_split: float = 0.8
    dataset_dir: str = 'dataset'
    results_path: str = 'results.json'
    report_path: str = 'report.json'
    max_tasks: Optional[int] = None

    def sim_config(self):
        from ..physics.simulator import SimConfig

        return SimConfig.from_dict(self.sim)

    def tower_spec(self, num_blocks: int, rng_seed: int):
        from ..towers.generator import TowerSpec

        return TowerSpec(
            num_blocks=num_blocks,
            rng_seed=rng_seed,
            num_density_configs=self.tower.num_density_configs,
            grid_aligned=self.tower.grid_aligned,
            size_noise=self.tower.size_noise,
            rotation_noise_deg=self.tower.rotation_noise_deg,
            resolution=self.resolution,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _merge(config: ExperimentConfig, data: Dict[str, Any], source: str) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    for key, value in data.items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"Unknown configuration key '{key}' in {source}")
        if key == 'tower':
            if not isinstance(value, dict):
                raise ConfigError(f"'tower' must be an object in {source}")
            tower_known = {f.name for f in fields(GenerationSettings)}
            unknown = set(value) - tower_known
            if unknown:
                raise ConfigError(f"Unknown tower settings {sorted(unknown)} in {source}")
            for tower_key, tower_value in value.items():
                setattr(config.tower, tower_key, tower_value)
        elif key == 'sim':
            if not isinstance(value, dict):
                raise ConfigError(f"'sim' must be an object in {source}")
            config.sim = {**config.sim, **value}
        else:
            setattr(config, key, value)
    return config


def validate_experiment_config(config: ExperimentConfig) -> ExperimentConfig:
    """Raise ConfigError listing every problem with ``config``."""
    report = validate_inputs(
        seed=config.seed,
        split=config.train_split,
        budgets=list(config.budgets) + [config.budget],
        paths={
            'dataset_dir': config.dataset_dir,
            'results_path': config.results_path,
            'report_path': config.report_path,
        },
        num_blocks=config.tower.num_blocks,
    )
    errors = list(report['errors'])
    if config.mode not in ('phys', 'shape+phys'):
        errors.append(f"mode must be 'phys' or 'shape+phys', got '{config.mode}'")
    if config.distance not in ('mse', 'mae'):
        errors.append(f"distance must be 'mse' or 'mae', got '{config.distance}'")
    if not isinstance(config.stride, int) or config.stride < 1:
        errors.append("stride must be a positive integer")
    if config.budget == 'exhaustive' and config.mode != 'phys':
        errors.append("an exhaustive budget needs 'phys' mode")
    if config.known_shape and config.mode != 'phys':
        errors.append("known_shape applies to 'phys' mode only")
    if config.resolution < 2 or config.resolution & (config.resolution - 1):
        errors.append("resolution must be a power of two")
    if config.tower.num_towers < 1 or config.tower.num_density_configs < 1:
        errors.append("num_towers and num_density_configs must be at least 1")
    try:
        config.sim_config()
    except (TypeError, ValueError) as e:
        errors.append(f"sim: {e}")
    if errors:
        raise ConfigError("Invalid experiment configuration: " + "; ".join(errors))
    return config


def load_experiment_config(path: Optional[Union[str, Path]] = None,
                           **overrides) -> ExperimentConfig:
    """
    Build an ExperimentConfig from defaults, an optional JSON file and overrides.

    Args:
        path: JSON config file (optional)
        **overrides: Field values that win over the file (None values are ignored)

    Returns:
        Validated ExperimentConfig
    """
    config = ExperimentConfig()
    if path is not None:
        path = Path(path)
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON (line {e.lineno}): {e.msg}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must contain a JSON object")
        config = _merge(config, data, str(path))
    config = _merge(config, overrides, 'overrides')
    return validate_experiment_config(config)
