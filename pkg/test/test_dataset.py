"""
Tests for dataset generation and loading
"""
import json

import pytest

from physprim.dataset.builder import generate_dataset, tower_block_count, tower_split
from physprim.dataset.records import INDEX_FILE, MANIFEST_FILE, DatasetRecord, load_dataset
from physprim.utils.config import load_experiment_config
from physprim.utils.error_handling import DataError
from physprim.voxels.grid import voxelize


class TestTowerAssignment:
    """Test per-tower block counts and splits."""

    def test_fixed_block_count(self, smoke_config):
        """An integer setting applies to every tower."""
        assert all(tower_block_count(smoke_config, i) == 2 for i in range(10))

    def test_sampled_block_count(self):
        """A list setting is sampled per tower, reproducibly."""
        config = load_experiment_config(tower={'num_blocks': [2, 5]})
        counts = [tower_block_count(config, i) for i in range(40)]
        assert set(counts) == {2, 5}
        assert counts == [tower_block_count(config, i) for i in range(40)]

    def test_split_fraction(self):
        """Roughly the train fraction of towers goes to training."""
        config = load_experiment_config(train_split=0.8)
        splits = [tower_split(config, i) for i in range(500)]
        assert 0.7 < splits.count('train') / 500 < 0.9


class TestGenerateDataset:
    """Test dataset generation."""

    def test_layout(self, smoke_config, tmp_path):
        """The directory holds manifest, index, voxels and trajectories."""
        manifest = generate_dataset(smoke_config, tmp_path / "out")
        root = tmp_path / "out"
        assert manifest['num_records'] == 4
        assert json.loads((root / MANIFEST_FILE).read_text())['rng']['algorithm'] == 'PCG64'
        assert len((root / INDEX_FILE).read_text().splitlines()) == 4
        assert sorted(p.name for p in (root / "voxels").iterdir()) == ["tower_0000.binvox", "tower_0001.binvox"]
        assert len(list((root / "trajectories").glob("*.csv"))) == 16
        assert (root / "trajectories" / "t0001_c01_i3.csv").exists()

    def test_deterministic_across_workers(self, smoke_config, tmp_path):
        """Worker count does not change a single byte of the index or trajectories."""
        generate_dataset(smoke_config, tmp_path / "a", max_workers=1)
        generate_dataset(smoke_config, tmp_path / "b", max_workers=2)
        assert (tmp_path / "a" / INDEX_FILE).read_bytes() == (tmp_path / "b" / INDEX_FILE).read_bytes()
        for path in sorted((tmp_path / "a" / "trajectories").iterdir()):
            assert path.read_bytes() == (tmp_path / "b" / "trajectories" / path.name).read_bytes()

    def test_verbose(self, smoke_config, tmp_path, capsys):
        """Verbose generation reports the records written."""
        generate_dataset(smoke_config, tmp_path / "out", verbose=True)
        assert "Wrote 4 records" in capsys.readouterr().out


class TestLoadDataset:
    """Test reading a generated dataset back."""

    def test_records(self, smoke_dataset):
        """Records carry densities, materials and a consistent split per tower."""
        assert len(smoke_dataset) == 4
        assert [r.record_id for r in smoke_dataset] == ["t0000_c00", "t0000_c01", "t0001_c00", "t0001_c01"]
        for record in smoke_dataset:
            assert record.num_blocks == 2
            assert len(record.slots) == 2
            assert len(record.materials) == 2
        assert smoke_dataset.records[0].split == smoke_dataset.records[1].split
        assert smoke_dataset.records[2].split == smoke_dataset.records[3].split

    def test_observations(self, smoke_dataset):
        """Observations are the four stored rollouts of the configured length."""
        observations = smoke_dataset.observations(smoke_dataset.records[0])
        assert [o.interaction_id for o in observations] == [0, 1, 2, 3]
        assert all(len(o) == 16 for o in observations)
        assert smoke_dataset.trajectory_length == 16

    def test_voxels_match_geometry(self, smoke_dataset):
        """Stored voxels are the voxelized tower."""
        record = smoke_dataset.records[0]
        assert smoke_dataset.voxels(record) == voxelize(record.object, 32)

    def test_get(self, smoke_dataset):
        """Records are found by id; unknown ids are data errors."""
        assert smoke_dataset.get("t0001_c00").tower_index == 1
        with pytest.raises(DataError, match="Unknown record"):
            smoke_dataset.get("t0009_c00")

    def test_record_round_trip(self, smoke_dataset):
        """Index records serialize and parse back."""
        record = smoke_dataset.records[0]
        assert DatasetRecord.from_dict(record.to_dict()) == record

    def test_missing_directory(self, tmp_path):
        """A missing directory is a data error."""
        with pytest.raises(DataError, match="not found"):
            load_dataset(tmp_path / "nowhere")

    def test_malformed_record_line(self, smoke_config, tmp_path):
        """A broken record is reported with its line in the index."""
        root = tmp_path / "broken"
        generate_dataset(smoke_config, root)
        lines = (root / INDEX_FILE).read_text().splitlines()
        record = json.loads(lines[2])
        record['split'] = 'validation'
        lines[2] = json.dumps(record)
        (root / INDEX_FILE).write_text("\n".join(lines) + "\n")
        with pytest.raises(DataError) as info:
            load_dataset(root)
        assert info.value.line == 3
        assert "split" in str(info.value)

    def test_missing_trajectory_file(self, smoke_dataset):
        """Deleted trajectory files surface as data errors."""
        record = smoke_dataset.records[0]
        (smoke_dataset.root / record.trajectory_paths[1]).unlink()
        with pytest.raises(DataError, match="not found"):
            smoke_dataset.observations(record)
