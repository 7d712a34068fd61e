"""
Utility functions for physprim
"""

from .error_handling import (
    PhysPrimError,
    DomainError,
    ValidationError,
    GenerationError,
    BinvoxParseError,
    SimulationError,
    FitError,
    SearchSpaceError,
    DegenerateConfigurationError,
    ConfigError,
    DataError,
    handle_cli_error,
    validate_inputs
)

from .config import (
    set_global_config,
    get_global_config,
    reset_global_config,
    ExperimentConfig,
    load_experiment_config
)

from .batch_processing import (
    parallel_map,
    process_in_batches
)

from .data_processing import (
    atomic_write_bytes,
    atomic_write_text,
    read_json,
    write_json,
    read_jsonl,
    write_jsonl,
    iter_jsonl
)

__all__ = [
    # Errors
    'PhysPrimError',
    'DomainError',
    'ValidationError',
    'GenerationError',
    'BinvoxParseError',
    'SimulationError',
    'FitError',
    'SearchSpaceError',
    'DegenerateConfigurationError',
    'ConfigError',
    'DataError',
    'handle_cli_error',
    'validate_inputs',

    # Configuration
    'set_global_config',
    'get_global_config',
    'reset_global_config',
    'ExperimentConfig',
    'load_experiment_config',

    # Batch processing
    'parallel_map',
    'process_in_batches',

    # File I/O
    'atomic_write_bytes',
    'atomic_write_text',
    'read_json',
    'write_json',
    'read_jsonl',
    'write_jsonl',
    'iter_jsonl',
]
