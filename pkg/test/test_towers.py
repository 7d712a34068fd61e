"""
Tests for synthetic block-tower generation
"""
from unittest.mock import patch

import numpy as np
import pytest
from scipy import stats

from physprim.core.materials import MATERIAL_NAMES, material_slots
from physprim.towers.generator import (
    GROUND_Z,
    TowerSpec,
    assign_densities,
    footprint_overlap,
    generate_tower,
    is_supported,
    normalize_tower,
    sample_tower,
    stack_blocks,
)
from physprim.utils.error_handling import GenerationError, ValidationError


class TestTowerSpec:
    """Test tower parameter validation."""

    @pytest.mark.parametrize("num_blocks", [1, 6, 2.5])
    def test_block_count_range(self, num_blocks):
        """Towers have 2 to 5 blocks."""
        with pytest.raises(ValidationError, match="num_blocks"):
            TowerSpec(num_blocks=num_blocks)

    def test_grid_alignment_excludes_noise(self):
        """Grid-aligned towers cannot be perturbed."""
        with pytest.raises(ValidationError, match="grid_aligned"):
            TowerSpec(num_blocks=3, grid_aligned=True, size_noise=0.1)


class TestStacking:
    """Test the stacking and support helpers."""

    def test_stack_blocks_heights(self):
        """Each block rests on the one below; the first on the ground."""
        sizes = np.array([[0.3, 0.3, 0.2], [0.2, 0.2, 0.4], [0.1, 0.1, 0.1]])
        centers = stack_blocks(sizes)
        np.testing.assert_allclose(centers[:, 2], [GROUND_Z + 0.1, GROUND_Z + 0.4, GROUND_Z + 0.65])

    def test_footprint_overlap(self):
        """Overlap is the intersection area of the xy rectangles."""
        assert footprint_overlap([0, 0], [1, 1], [0.5, 0.5], [1, 1]) == pytest.approx(0.25)
        assert footprint_overlap([0, 0], [1, 1], [2.0, 0.0], [1, 1]) == 0.0

    def test_centered_stack_is_supported(self):
        """Concentric blocks are always supported."""
        sizes = np.array([[0.4, 0.4, 0.2], [0.2, 0.2, 0.2]])
        assert is_supported(stack_blocks(sizes), sizes)

    def test_overhanging_block_unsupported(self):
        """A block centred beyond the base footprint is rejected."""
        sizes = np.array([[0.2, 0.2, 0.2], [0.4, 0.4, 0.2]])
        centers = stack_blocks(sizes, [[0.0, 0.0], [0.15, 0.0]])
        assert not is_supported(centers, sizes)

    def test_normalize_fits_unit_cube(self):
        """Oversized towers are scaled down and put on the ground."""
        sizes = np.array([[0.8, 0.6, 0.5], [0.4, 0.4, 0.9]])
        centers, scaled = normalize_tower(stack_blocks(sizes), sizes)
        assert (centers[:, 2] - scaled[:, 2] / 2.0).min() == pytest.approx(GROUND_Z)
        assert (centers[:, 2] + scaled[:, 2] / 2.0).max() == pytest.approx(0.5)
        np.testing.assert_allclose(scaled, sizes / 1.4)


class TestSampleTower:
    """Test tower sampling."""

    @pytest.mark.parametrize("num_blocks", [2, 3, 4, 5])
    def test_valid_towers(self, num_blocks):
        """Generated towers are ordered, supported and inside the unit cube."""
        tower, _ = generate_tower(TowerSpec(num_blocks=num_blocks, rng_seed=[7, num_blocks]))
        assert len(tower) == num_blocks
        assert tower.fits_unit_cube()
        assert tower.slots is None
        low, _ = tower.bounds()
        assert low[2] == pytest.approx(GROUND_Z, abs=1e-9)
        sizes = np.array([p.size for p in tower])
        centers = np.array([p.translation for p in tower])
        assert is_supported(centers, sizes)

    def test_blocks_touch(self):
        """Each block's bottom face meets the top face of the block below."""
        tower, _ = generate_tower(TowerSpec(num_blocks=4, rng_seed=3))
        for below, above in zip(tower.primitives, tower.primitives[1:]):
            top = below.translation[2] + below.size[2] / 2.0
            bottom = above.translation[2] - above.size[2] / 2.0
            assert top == pytest.approx(bottom, abs=1e-9)

    def test_deterministic(self):
        """The same seed gives the same tower."""
        spec = TowerSpec(num_blocks=3, rng_seed=[11, 2])
        assert generate_tower(spec) == generate_tower(spec)

    def test_seeds_differ(self):
        """Different seeds give different towers."""
        a, _ = generate_tower(TowerSpec(num_blocks=3, rng_seed=1))
        b, _ = generate_tower(TowerSpec(num_blocks=3, rng_seed=2))
        assert a != b

    def test_grid_aligned_faces(self):
        """Grid-aligned towers have every face on the voxel lattice."""
        tower, _ = generate_tower(TowerSpec(num_blocks=3, rng_seed=5, grid_aligned=True, resolution=32))
        for primitive in tower:
            low, high = primitive.bounds()
            for value in np.concatenate([low, high]):
                cell = (value + 0.5) * 32
                assert cell == pytest.approx(round(cell), abs=1e-9)

    def test_rotation_noise_is_yaw_only(self):
        """Rotation noise turns blocks about the vertical axis only."""
        tower, _ = generate_tower(TowerSpec(num_blocks=2, rng_seed=4, rotation_noise_deg=20.0))
        for primitive in tower:
            assert primitive.rotation[1] == 0.0
            assert primitive.rotation[2] == 0.0
        assert tower.fits_unit_cube()

    def test_reseeds_after_failure(self):
        """generate_tower retries with [seed, r] after a failed attempt."""
        real_sample = sample_tower
        calls = []

        def flaky(spec):
            calls.append(spec.rng_seed)
            if len(calls) == 1:
                raise GenerationError("no placement")
            return real_sample(spec)

        with patch('physprim.towers.generator.sample_tower', side_effect=flaky):
            _, used = generate_tower(TowerSpec(num_blocks=2, rng_seed=9))
        assert calls == [9, [9, 1]]
        assert used == [9, 1]

    def test_gives_up(self):
        """Persistent failure is reported as GenerationError."""
        with patch('physprim.towers.generator.sample_tower', side_effect=GenerationError("never")):
            with pytest.raises(GenerationError, match="3 reseeds"):
                generate_tower(TowerSpec(num_blocks=2), max_retries=3)


class TestAssignDensities:
    """Test density configuration sampling."""

    def test_slots_match_materials(self, two_block_tower):
        """Every slot belongs to the block's labelled material."""
        configs = assign_densities(two_block_tower, seed=[0, 1], num_configs=16)
        assert len(configs) == 16
        for config in configs:
            assert config.has_densities
            for slot, material in zip(config.slots, config.materials):
                assert slot in material_slots(material)

    def test_deterministic(self, two_block_tower):
        """The same seed yields the same configurations."""
        a = assign_densities(two_block_tower, seed=4, num_configs=3)
        b = assign_densities(two_block_tower, seed=4, num_configs=3)
        assert [c.slots for c in a] == [c.slots for c in b]

    def test_geometry_unchanged(self, two_block_tower):
        """Only densities are assigned."""
        config = assign_densities(two_block_tower, seed=0, num_configs=1)[0]
        assert config.geometry_only() == two_block_tower

    def test_invalid_count(self, two_block_tower):
        """At least one configuration is required."""
        with pytest.raises(ValidationError):
            assign_densities(two_block_tower, seed=0, num_configs=0)

    def test_materials_uniform(self, two_block_tower):
        """Materials are drawn uniformly (chi-square against equal counts)."""
        configs = assign_densities(two_block_tower, seed=11, num_configs=5000)
        names = [m.name for config in configs for m in config.materials]
        counts = [names.count(name) for name in MATERIAL_NAMES]
        assert stats.chisquare(counts).pvalue > 1e-4

    def test_slots_uniform_within_material(self, two_block_tower):
        """Within a material every slot is equally likely."""
        configs = assign_densities(two_block_tower, seed=12, num_configs=5000)
        drawn = {name: [] for name in MATERIAL_NAMES}
        for config in configs:
            for slot, material in zip(config.slots, config.materials):
                drawn[material.name].append(slot)
        for name, slots in drawn.items():
            choices = sorted(material_slots(name))
            counts = [slots.count(s) for s in choices]
            assert stats.chisquare(counts).pvalue > 1e-4, name
