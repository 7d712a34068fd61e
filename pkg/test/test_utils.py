"""
Tests for utility functions
"""
import json
import threading
from unittest.mock import patch

import numpy as np
import pytest

from physprim.utils.batch_processing import parallel_map, process_in_batches
from physprim.utils.config import (
    get_global_config,
    load_experiment_config,
    reset_global_config,
    set_global_config,
)
from physprim.utils.data_processing import (
    atomic_write_text,
    read_json,
    read_jsonl,
    write_json,
    write_jsonl,
)
from physprim.utils.error_handling import (
    BinvoxParseError,
    ConfigError,
    DataError,
    DegenerateConfigurationError,
    DomainError,
    FitError,
    SearchSpaceError,
    SimulationError,
    handle_cli_error,
    validate_inputs,
)
from physprim.utils.rotations import (
    canonical_quaternion,
    quat_conjugate,
    quat_from_axis_angle,
    quat_from_matrix,
    quat_multiply,
    quat_slerp,
    quat_to_matrix,
    rotation_angle_between,
)


class TestGlobalConfig:
    """Test process-wide runtime settings."""

    def test_set_and_get(self):
        """Settings are updated and read back."""
        set_global_config(max_workers=3)
        assert get_global_config('max_workers') == 3
        assert get_global_config()['progress_bar'] is False

    def test_unknown_setting(self):
        """Unknown keys are a configuration error."""
        with pytest.raises(ConfigError, match="Unknown global settings"):
            set_global_config(colour=True)

    def test_reset(self):
        """reset_global_config restores the defaults."""
        set_global_config(ranking_keep=3)
        assert reset_global_config()['ranking_keep'] == 32


class TestExperimentConfig:
    """Test loading and validating experiment configurations."""

    def test_defaults(self):
        """Without a file the built-in defaults apply."""
        config = load_experiment_config()
        assert config.budgets == [1, 8, 64, 512]
        assert config.mode == 'phys'
        assert config.sim_config().steps == 256

    def test_file_and_overrides(self, smoke_config_file):
        """Overrides win over the file; None overrides are ignored."""
        config = load_experiment_config(smoke_config_file, budget=1, mode=None)
        assert config.budget == 1
        assert config.mode == 'phys'
        assert config.tower.num_towers == 2
        assert config.sim_config().steps == 16

    def test_missing_file(self, tmp_path):
        """A missing config file is a configuration error."""
        with pytest.raises(ConfigError, match="not found"):
            load_experiment_config(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """Unparseable JSON reports the line."""
        path = tmp_path / "bad.json"
        path.write_text('{\n"seed": ,\n}')
        with pytest.raises(ConfigError, match="line 2"):
            load_experiment_config(path)

    def test_unknown_key(self, tmp_path):
        """Unknown top-level keys are rejected."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"seeds": 3}))
        with pytest.raises(ConfigError, match="seeds"):
            load_experiment_config(path)

    def test_unknown_sim_key(self):
        """Unknown simulator settings are rejected."""
        with pytest.raises(ConfigError, match="sim"):
            load_experiment_config(sim={'gravty': 9.8})

    def test_exhaustive_needs_phys_mode(self):
        """Exhaustive search is only defined for known shapes."""
        with pytest.raises(ConfigError, match="exhaustive"):
            load_experiment_config(budget='exhaustive', mode='shape+phys')

    def test_known_shape_needs_phys_mode(self):
        """The known-shape option belongs to physics-only inference."""
        with pytest.raises(ConfigError, match="known_shape"):
            load_experiment_config(known_shape=True, mode='shape+phys')

    @pytest.mark.parametrize("resolution", [0, 3, 48])
    def test_resolution_power_of_two(self, resolution):
        """Voxel resolutions must be powers of two."""
        with pytest.raises(ConfigError, match="power of two"):
            load_experiment_config(resolution=resolution)

    def test_paths_distinct(self):
        """Results and report paths must differ."""
        with pytest.raises(ConfigError, match="distinct"):
            load_experiment_config(results_path='out.json', report_path='out.json')


class TestValidateInputs:
    """Test parameter validation."""

    def test_valid_inputs(self):
        """A standard parameter set passes."""
        result = validate_inputs(seed=7, split=0.8, budgets=[1, 8, 64, 512], num_blocks=[2, 3])
        assert result['valid']
        assert not result['errors']

    def test_invalid_split(self):
        """Splits must lie strictly between 0 and 1."""
        result = validate_inputs(split=1.0)
        assert not result['valid']

    def test_nonstandard_budget_warns(self):
        """Budgets outside the standard sweep only warn."""
        result = validate_inputs(budgets=[3])
        assert result['valid']
        assert result['warnings']

    def test_bad_budget(self):
        """Zero and unknown strings are invalid budgets."""
        assert not validate_inputs(budgets=[0])['valid']
        assert not validate_inputs(budgets=['all'])['valid']

    def test_block_count_range(self):
        """Block counts outside 2..5 are rejected."""
        assert not validate_inputs(num_blocks=6)['valid']


class TestHandleCliError:
    """Test exit-code classification."""

    @pytest.mark.parametrize("error, exit_code", [
        (ConfigError("bad"), 2),
        (SearchSpaceError("too many"), 2),
        (DataError("missing", path="x"), 3),
        (BinvoxParseError("bad magic", offset=0), 3),
        (FileNotFoundError("x"), 3),
        (DomainError("outside"), 3),
        (SimulationError("diverged", step=5), 4),
        (DegenerateConfigurationError("coplanar"), 4),
        (FitError("empty"), 4),
    ])
    def test_exit_codes(self, error, exit_code):
        """Each error class maps to its documented exit code."""
        assert handle_cli_error(error)['exit_code'] == exit_code

    def test_error_context_in_message(self):
        """Data errors carry path and line in their message."""
        error = DataError("Malformed record", path="index.jsonl", line=4)
        assert "index.jsonl:4" in str(error)
        assert error.line == 4


class TestParallelMap:
    """Test the worker pool helper."""

    def test_order_preserved(self):
        """Results follow input order for any worker count."""
        items = list(range(20))
        assert parallel_map(lambda x: x * x, items, max_workers=4) == [x * x for x in items]
        assert parallel_map(lambda x: x * x, items, max_workers=1) == [x * x for x in items]

    def test_uses_global_workers(self):
        """The global max_workers applies when none is given."""
        set_global_config(max_workers=3)
        seen = set()

        def record(item):
            seen.add(threading.get_ident())
            return item

        assert parallel_map(record, range(5)) == list(range(5))
        assert len(seen) >= 1

    def test_exception_propagates(self):
        """Worker exceptions reach the caller."""
        def fail(item):
            if item == 3:
                raise ValueError("boom")
            return item

        with pytest.raises(ValueError, match="boom"):
            parallel_map(fail, range(6), max_workers=2)

    def test_inline_for_single_worker(self):
        """One worker runs inline without a thread pool."""
        with patch('physprim.utils.batch_processing.ThreadPoolExecutor') as executor:
            parallel_map(str, [1, 2, 3], max_workers=1)
            executor.assert_not_called()

    def test_batches(self):
        """Batches cover the input in order."""
        assert list(process_in_batches(range(5), batch_size=2)) == [[0, 1], [2, 3], [4]]


class TestDataProcessing:
    """Test atomic file output and JSON helpers."""

    def test_atomic_write_creates_parents(self, tmp_path):
        """Parent directories are created and no temp files remain."""
        path = atomic_write_text(tmp_path / "a" / "b.txt", "hello")
        assert path.read_text() == "hello"
        assert [p.name for p in path.parent.iterdir()] == ["b.txt"]

    def test_json_is_stable(self, tmp_path):
        """JSON output has sorted keys and a trailing newline."""
        path = write_json(tmp_path / "x.json", {"b": 1, "a": 2})
        assert path.read_text() == '{\n  "a": 2,\n  "b": 1\n}\n'
        assert read_json(path) == {"a": 2, "b": 1}

    def test_jsonl_round_trip(self, tmp_path):
        """JSON-lines records are written one per line."""
        records = [{"tower_id": 0}, {"tower_id": 1}]
        path = write_jsonl(tmp_path / "index.jsonl", records)
        assert read_jsonl(path) == records

    def test_jsonl_bad_line(self, tmp_path):
        """A malformed record reports its 1-based line number."""
        path = tmp_path / "index.jsonl"
        path.write_text('{"a": 1}\n\n[1, 2]\n')
        with pytest.raises(DataError) as info:
            read_jsonl(path)
        assert info.value.line == 3

    def test_read_json_missing(self, tmp_path):
        """Missing JSON files raise DataError."""
        with pytest.raises(DataError):
            read_json(tmp_path / "none.json")


class TestRotations:
    """Test quaternion helpers."""

    def test_canonical_sign(self):
        """Canonical quaternions have non-negative w."""
        q = canonical_quaternion([-0.5, 0.5, 0.5, 0.5])
        assert q[0] >= 0.0
        assert np.linalg.norm(q) == pytest.approx(1.0)

    def test_zero_quaternion(self):
        """Zero quaternions cannot be normalized."""
        with pytest.raises(ValueError):
            canonical_quaternion([0.0, 0.0, 0.0, 0.0])

    def test_multiply_matches_matrices(self):
        """Quaternion products compose like rotation matrices."""
        a = quat_from_axis_angle([1.0, 2.0, 0.5], 0.7)
        b = quat_from_axis_angle([0.0, -1.0, 1.0], 1.9)
        np.testing.assert_allclose(quat_to_matrix(quat_multiply(a, b)),
                                   quat_to_matrix(a) @ quat_to_matrix(b), atol=1e-12)

    @pytest.mark.parametrize("axis, angle", [
        ([0.0, 0.0, 1.0], 0.3),
        ([1.0, 0.0, 0.0], np.pi - 1e-3),
        ([0.0, 1.0, 0.0], 2.5),
        ([1.0, 1.0, 1.0], 3.0),
    ])
    def test_from_matrix_inverts_to_matrix(self, axis, angle):
        """quat_from_matrix recovers the rotation of quat_to_matrix."""
        q = canonical_quaternion(quat_from_axis_angle(axis, angle))
        np.testing.assert_allclose(quat_from_matrix(quat_to_matrix(q)), q, atol=1e-12)

    def test_angle_between(self):
        """The geodesic angle ignores quaternion sign."""
        q = quat_from_axis_angle([0.0, 0.0, 1.0], 0.4)
        assert rotation_angle_between(q, -q) == pytest.approx(0.0, abs=1e-7)
        assert rotation_angle_between([1.0, 0.0, 0.0, 0.0], q) == pytest.approx(0.4)

    def test_conjugate_inverts(self):
        """q * conj(q) is the identity."""
        q = quat_from_axis_angle([0.3, -0.2, 0.9], 1.1)
        np.testing.assert_allclose(quat_multiply(q, quat_conjugate(q)), [1.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_slerp_endpoints(self):
        """Slerp returns its endpoints at fractions 0 and 1."""
        a = np.array([1.0, 0.0, 0.0, 0.0])
        b = quat_from_axis_angle([0.0, 0.0, 1.0], 1.0)
        np.testing.assert_allclose(quat_slerp(a, b, 0.0), a, atol=1e-12)
        np.testing.assert_allclose(quat_slerp(a, b, 1.0), b, atol=1e-12)
        assert rotation_angle_between(a, quat_slerp(a, b, 0.5)) == pytest.approx(0.5)
