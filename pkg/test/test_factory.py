"""
Tests for the package-level factory functions
"""
import pytest

import physprim
from physprim.physics.simulator import SimConfig


class TestFactoryFunctions:
    """Test physprim.tower and physprim.inference_task."""

    def test_tower(self):
        """tower() returns a geometry-only tower of the requested size."""
        obj = physprim.tower(num_blocks=3, seed=1)
        assert len(obj) == 3
        assert obj.slots is None
        assert obj.fits_unit_cube()

    def test_tower_deterministic(self):
        """The same seed gives the same tower."""
        assert physprim.tower(seed=4, grid_aligned=True) == physprim.tower(seed=4, grid_aligned=True)

    def test_inference_task(self, heavy_tower):
        """inference_task simulates the four pushes and keeps geometry only."""
        config = SimConfig.free_flight(steps=4)
        task = physprim.inference_task(heavy_tower, budget=2, sim_config=config)
        assert len(task.observations) == 4
        assert all(len(o) == 4 for o in task.observations)
        assert task.shape.slots is None
        assert task.budget == 2

    def test_inference_task_needs_densities(self, two_block_tower):
        """Geometry-only objects cannot be simulated."""
        with pytest.raises(physprim.PhysPrimError):
            physprim.inference_task(two_block_tower, sim_config=SimConfig.free_flight(steps=4))

    def test_info(self, capsys):
        """info() prints the banner and runtime settings."""
        physprim.info()
        output = capsys.readouterr().out
        assert "physprim v" in output
        assert "Runtime settings" in output
