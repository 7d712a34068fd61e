"""
Error handling utilities for physprim
"""

from typing import Dict, Any, Optional, List, Sequence


class PhysPrimError(Exception):
    """Base class for every error raised by physprim."""


class DomainError(PhysPrimError, ValueError):
    """Input outside the domain an operation is defined on."""


class ValidationError(DomainError):
    """One or more invariants of a domain value are violated."""

    def __init__(self, message: str, violations: Optional[Sequence[str]] = None):
        self.violations = list(violations or [])
        if self.violations:
            message = f"{message}: " + "; ".join(self.violations)
        super().__init__(message)


class GenerationError(PhysPrimError, RuntimeError):
    """Synthetic generation gave up after exhausting its resample budget."""


class BinvoxParseError(DomainError):
    """Malformed binvox stream; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


class SimulationError(PhysPrimError, ArithmeticError):
    """Numerical failure inside a rollout; ``step`` is the failing step index."""

    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(f"{message} at step {step}")


class FitError(PhysPrimError, RuntimeError):
    """Primitive fitting could not produce a decomposition."""


class SearchSpaceError(DomainError):
    """Exhaustive search would enumerate more candidates than allowed."""


class DegenerateConfigurationError(DomainError):
    """Point correspondences do not constrain a pose."""


class ConfigError(PhysPrimError, ValueError):
    """Invalid experiment configuration."""


class DataError(PhysPrimError, IOError):
    """Missing or malformed dataset file."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(f"{message}{location}")


EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_NUMERICAL_FAILURE = 4


def handle_cli_error(error: Exception) -> Dict[str, Any]:
    """
    Classify an exception raised by a pipeline command.

    Args:
        error: Exception object to classify

    Returns:
        Analysis with exit code and suggested action
    """

    error_analysis = {
        'error_type': type(error).__name__,
        'error_message': str(error),
        'exit_code': EXIT_DATA_ERROR,
        'suggested_action': 'none',
        'description': 'Unknown error'
    }

    if isinstance(error, ConfigError):
        error_analysis.update({
            'error_type': 'config_error',
            'exit_code': EXIT_CONFIG_ERROR,
            'suggested_action': 'check_config',
            'description': 'Invalid configuration'
        })

    elif isinstance(error, (SimulationError, DegenerateConfigurationError)):
        error_analysis.update({
            'error_type': 'numerical_failure',
            'exit_code': EXIT_NUMERICAL_FAILURE,
            'suggested_action': 'inspect_inputs',
            'description': 'Numerical failure'
        })

    elif isinstance(error, SearchSpaceError):
        error_analysis.update({
            'error_type': 'search_space',
            'exit_code': EXIT_CONFIG_ERROR,
            'suggested_action': 'increase_stride',
            'description': 'Exhaustive search space too large'
        })

    elif isinstance(error, (DataError, BinvoxParseError)):
        error_analysis.update({
            'error_type': 'data_error',
            'exit_code': EXIT_DATA_ERROR,
            'suggested_action': 'check_dataset',
            'description': 'Missing or malformed data'
        })

    elif isinstance(error, FileNotFoundError):
        error_analysis.update({
            'error_type': 'file_not_found',
            'exit_code': EXIT_DATA_ERROR,
            'suggested_action': 'check_path',
            'description': 'Local file or directory not found'
        })

    elif isinstance(error, PermissionError):
        error_analysis.update({
            'error_type': 'permission_error',
            'exit_code': EXIT_DATA_ERROR,
            'suggested_action': 'check_permissions',
            'description': 'Insufficient permissions'
        })

    elif isinstance(error, (FitError, GenerationError)):
        error_analysis.update({
            'error_type': 'numerical_failure',
            'exit_code': EXIT_NUMERICAL_FAILURE,
            'suggested_action': 'change_seed_or_tolerance',
            'description': 'Generation or fitting did not succeed'
        })

    elif isinstance(error, DomainError):
        error_analysis.update({
            'error_type': 'domain_error',
            'exit_code': EXIT_DATA_ERROR,
            'suggested_action': 'check_inputs',
            'description': 'Value outside the supported domain'
        })

    return error_analysis


def validate_inputs(seed=None, split: Optional[float] = None,
                    budgets: Optional[List] = None,
                    paths: Optional[Dict[str, str]] = None,
                    num_blocks=None) -> Dict[str, Any]:
    """
    Validate experiment parameters before running a pipeline.

    Args:
        seed: RNG seed to validate
        split: Train fraction to validate
        budgets: Inference budgets to validate
        paths: Named output/input paths that must be distinct
        num_blocks: Block count (int or list of ints)

    Returns:
        Validation results with detailed feedback
    """

    validation_result = {
        'valid': True,
        'errors': [],
        'warnings': [],
        'suggestions': []
    }

    if seed is not None:
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 2 ** 64:
            validation_result['valid'] = False
            validation_result['errors'].append("Seed must be an integer in [0, 2**64)")

    if split is not None:
        try:
            split_value = float(split)
            if not 0.0 < split_value < 1.0:
                validation_result['valid'] = False
                validation_result['errors'].append("Train split must lie strictly between 0 and 1")
        except (TypeError, ValueError):
            validation_result['valid'] = False
            validation_result['errors'].append("Train split must be numeric")

    if budgets is not None:
        if not isinstance(budgets, (list, tuple)) or len(budgets) == 0:
            validation_result['valid'] = False
            validation_result['errors'].append("Budgets must be a non-empty list")
        else:
            for budget in budgets:
                if budget == "exhaustive":
                    continue
                if not isinstance(budget, int) or isinstance(budget, bool) or budget < 1:
                    validation_result['valid'] = False
                    validation_result['errors'].append(f"Invalid budget {budget!r}: use a positive integer or 'exhaustive'")
            if any(b not in (1, 8, 64, 512, "exhaustive") for b in budgets):
                validation_result['warnings'].append("Budgets outside {1, 8, 64, 512} are not part of the standard sweep")

    if paths is not None:
        resolved = [str(p) for p in paths.values() if p is not None]
        if len(set(resolved)) != len(resolved):
            validation_result['valid'] = False
            validation_result['errors'].append(f"Paths must be distinct: {paths}")

    if num_blocks is not None:
        counts = num_blocks if isinstance(num_blocks, (list, tuple)) else [num_blocks]
        if not counts or any(not isinstance(c, int) or not 2 <= c <= 5 for c in counts):
            validation_result['valid'] = False
            validation_result['errors'].append("Block counts must be integers between 2 and 5")

    if validation_result['errors']:
        validation_result['suggestions'].append("Fix the errors above before proceeding")

    if validation_result['warnings']:
        validation_result['suggestions'].append("Review warnings for potential issues")

    return validation_result
