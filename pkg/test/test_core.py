"""
Tests for core domain types: materials, primitives, poses and priors
"""
import itertools

import numpy as np
import pytest

from physprim.core.materials import (
    MATERIALS,
    NUM_DENSITY_SLOTS,
    get_material,
    material_slots,
    slot_density,
    validate_slot,
)
from physprim.core.poses import (
    SIMULATION_DT,
    TRAJECTORY_LENGTH,
    Pose,
    Trajectory,
    read_trajectory_csv,
    write_trajectory_csv,
)
from physprim.core.primitives import MAX_PRIMITIVES, Primitive, PrimitiveObject, canonical_order
from physprim.core.priors import DensityPrior, read_prior, write_prior
from physprim.utils.error_handling import DataError, DomainError, ValidationError


class TestMaterials:
    """Test density slots and the material table."""

    def test_slot_density_units(self):
        """Slot i stands for i * 100 kg/m^3."""
        assert slot_density(1) == 100.0
        assert slot_density(37) == 3700.0
        assert slot_density(100) == 10000.0

    @pytest.mark.parametrize("slot", [0, 101, -3, 2.5, True])
    def test_invalid_slots(self, slot):
        """Slots outside 1..100 or non-integral are rejected."""
        with pytest.raises(DomainError):
            validate_slot(slot)

    def test_material_ranges(self):
        """Every material covers its documented slot intervals."""
        assert material_slots('Wood') == frozenset(range(1, 11))
        assert material_slots('Brick') == frozenset(range(11, 21))
        assert material_slots('Stone') == frozenset(range(21, 31))
        assert material_slots('Ceramic') == frozenset(range(31, 61))
        assert material_slots('Metal') == frozenset(range(21, 36)) | frozenset(range(71, 101))

    def test_metal_overlaps_stone(self):
        """Metal shares slots 21..30 with stone."""
        assert material_slots('Metal') & material_slots('Stone') == frozenset(range(21, 31))

    def test_lookup_case_insensitive(self):
        """Materials are found by name regardless of case."""
        assert get_material('metal') is MATERIALS['Metal']

    def test_unknown_material(self):
        """Unknown names raise DomainError listing the options."""
        with pytest.raises(DomainError, match="Available materials"):
            get_material('Plastic')

    def test_all_material_slots_valid(self):
        """Material slots stay inside 1..100."""
        for material in MATERIALS.values():
            assert min(material.slots) >= 1
            assert max(material.slots) <= NUM_DENSITY_SLOTS


class TestPrimitive:
    """Test the Primitive class."""

    def test_rotation_canonicalized(self):
        """Quaternions are normalized and stored with q_w >= 0."""
        primitive = Primitive(size=(0.2, 0.2, 0.2), rotation=(-2.0, 0.0, 0.0, 0.0))
        assert primitive.rotation == (1.0, 0.0, 0.0, 0.0)

    def test_volume_and_bounds(self):
        """Axis-aligned volume and bounds follow from size and translation."""
        primitive = Primitive(size=(0.2, 0.4, 0.5), translation=(0.1, 0.0, -0.25))
        assert primitive.volume == pytest.approx(0.04)
        low, high = primitive.bounds()
        np.testing.assert_allclose(low, [0.0, -0.2, -0.5])
        np.testing.assert_allclose(high, [0.2, 0.2, 0.0])

    @pytest.mark.parametrize("size", [(0.0, 0.2, 0.2), (1.2, 0.2, 0.2), (-0.1, 0.2, 0.2)])
    def test_invalid_size(self, size):
        """Edges must lie in (0, 1]."""
        with pytest.raises(ValidationError):
            Primitive(size=size)

    def test_invalid_translation(self):
        """Translations are bounded by 0.5 per axis."""
        with pytest.raises(ValidationError, match="translation"):
            Primitive(size=(0.2, 0.2, 0.2), translation=(0.6, 0.0, 0.0))

    def test_zero_quaternion(self):
        """A zero rotation quaternion is invalid."""
        with pytest.raises(ValidationError):
            Primitive(size=(0.2, 0.2, 0.2), rotation=(0.0, 0.0, 0.0, 0.0))

    def test_contains(self):
        """Points inside the closed cuboid are reported."""
        primitive = Primitive(size=(0.2, 0.2, 0.2))
        mask = primitive.contains([[0.0, 0.0, 0.0], [0.1, 0.1, 0.1], [0.11, 0.0, 0.0]])
        assert mask.tolist() == [True, True, False]

    def test_dict_round_trip(self):
        """to_dict/from_dict preserve all fields."""
        primitive = Primitive(size=(0.2, 0.3, 0.4), translation=(0.0, 0.1, -0.3), density_slot=12)
        assert Primitive.from_dict(primitive.to_dict()) == primitive

    def test_from_dict_missing_size(self):
        """A record without size is malformed."""
        with pytest.raises(ValidationError, match="missing field"):
            Primitive.from_dict({'translation': [0, 0, 0]})


class TestPrimitiveObject:
    """Test composite objects."""

    def test_ordering_enforced(self, two_block_tower):
        """Primitives must be ordered bottom to top."""
        bottom, top = two_block_tower.primitives
        with pytest.raises(ValidationError, match="bottom-to-top"):
            PrimitiveObject((top, bottom))

    def test_canonical_order_sorts(self, two_block_tower):
        """canonical_order sorts by (z, x, y) and carries material labels."""
        bottom, top = two_block_tower.primitives
        ordered = canonical_order([top, bottom], materials=['Wood', 'Stone'])
        assert ordered.primitives == (bottom, top)
        assert [m.name for m in ordered.materials] == ['Stone', 'Wood']

    def test_canonical_order_ties_are_stable(self):
        """Equal keys keep their input order."""
        a = Primitive(size=(0.2, 0.2, 0.2), density_slot=1)
        b = Primitive(size=(0.1, 0.1, 0.1), density_slot=2)
        ordered = canonical_order([a, b])
        assert ordered.slots == (1, 2)

    def test_canonical_order_permutation_invariant(self):
        """Any input order of the same primitives gives the same object."""
        primitives = [
            Primitive(size=(0.2, 0.2, 0.1), translation=(0.0, 0.0, -0.45), density_slot=1),
            Primitive(size=(0.1, 0.1, 0.1), translation=(-0.1, 0.0, -0.35), density_slot=2),
            Primitive(size=(0.1, 0.1, 0.1), translation=(0.1, 0.0, -0.35), density_slot=3),
            Primitive(size=(0.1, 0.1, 0.1), translation=(0.0, 0.1, -0.25), density_slot=4),
        ]
        expected = canonical_order(primitives)
        assert expected.slots == (1, 2, 3, 4)
        for order in itertools.permutations(range(len(primitives))):
            assert canonical_order([primitives[i] for i in order]) == expected

    def test_primitive_count_limit(self):
        """At most eight primitives are allowed."""
        primitives = [Primitive(size=(0.1, 0.1, 0.1), translation=(0.0, 0.0, -0.45 + 0.1 * k))
                      for k in range(MAX_PRIMITIVES + 1)]
        with pytest.raises(ValidationError, match="primitive count"):
            PrimitiveObject(tuple(primitives))

    def test_slots(self, two_block_tower):
        """Slots are None until every primitive has a density."""
        assert two_block_tower.slots is None
        dense = two_block_tower.with_slots([5, 40])
        assert dense.slots == (5, 40)
        assert dense.geometry_only().slots is None

    def test_with_slots_length_mismatch(self, two_block_tower):
        """The slot vector must match the primitive count."""
        with pytest.raises(DomainError):
            two_block_tower.with_slots([5])

    def test_fits_unit_cube(self, two_block_tower):
        """The fixture tower lies in the unit cube."""
        assert two_block_tower.fits_unit_cube()

    def test_dict_round_trip_with_materials(self, heavy_tower):
        """Material labels survive serialization."""
        restored = PrimitiveObject.from_dict(heavy_tower.to_dict())
        assert restored == heavy_tower
        assert [m.name for m in restored.materials] == ['Metal', 'Ceramic']


class TestPose:
    """Test poses."""

    def test_canonical_orientation(self):
        """Orientation is normalized with q_w >= 0."""
        pose = Pose((0.0, 0.0, 0.0), (0.0, 0.0, 0.0, -1.0))
        assert pose.orientation == (0.0, 0.0, 0.0, 1.0)

    def test_transform(self):
        """A 90 degree yaw maps x onto y before translating."""
        half = np.sqrt(0.5)
        pose = Pose((1.0, 0.0, 0.0), (half, 0.0, 0.0, half))
        np.testing.assert_allclose(pose.transform([[1.0, 0.0, 0.0]]), [[1.0, 1.0, 0.0]], atol=1e-12)

    def test_invalid_position(self):
        """Non-finite positions are rejected."""
        with pytest.raises(ValidationError):
            Pose((np.nan, 0.0, 0.0))


class TestTrajectory:
    """Test trajectories and the trajectory CSV format."""

    def _trajectory(self, length=5):
        poses = np.zeros((length, 7))
        poses[:, 0] = np.linspace(0.0, 1.0, length) / 3.0
        poses[:, 3] = 1.0
        return Trajectory(poses, interaction_id=2)

    def test_quaternion_sign_canonicalized(self):
        """Stored quaternions have q_w >= 0."""
        poses = np.array([[0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0]])
        assert Trajectory(poses).orientations[0].tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_times(self):
        """Pose k is stamped (k + 1) * dt."""
        trajectory = self._trajectory(3)
        np.testing.assert_allclose(trajectory.times, [SIMULATION_DT, 2 * SIMULATION_DT, 3 * SIMULATION_DT])

    def test_invalid_shape(self):
        """Poses need seven columns."""
        with pytest.raises(ValidationError):
            Trajectory(np.zeros((4, 6)))

    def test_invalid_interaction(self):
        """Interaction ids are 0..3."""
        with pytest.raises(ValidationError, match="interaction_id"):
            Trajectory(np.tile([0, 0, 0, 1, 0, 0, 0], (2, 1)), interaction_id=4)

    def test_csv_header_and_bitwise_round_trip(self, tmp_path):
        """The CSV has the documented header and re-reads bit for bit."""
        trajectory = self._trajectory(5)
        path = write_trajectory_csv(trajectory, tmp_path / "traj.csv")
        assert path.read_text().splitlines()[0] == "t,px,py,pz,qw,qx,qy,qz"
        restored = read_trajectory_csv(path, interaction_id=2, expected_length=5)
        assert restored == trajectory
        assert restored.dt == SIMULATION_DT

    def test_csv_length_checked(self, tmp_path):
        """The standard length is enforced by default."""
        path = write_trajectory_csv(self._trajectory(5), tmp_path / "short.csv")
        with pytest.raises(DataError, match=f"expected {TRAJECTORY_LENGTH}"):
            read_trajectory_csv(path)

    def test_csv_bad_header(self, tmp_path):
        """A wrong header is a data error on line 1."""
        path = tmp_path / "bad.csv"
        path.write_text("time,x,y,z\n0,0,0,0\n")
        with pytest.raises(DataError) as info:
            read_trajectory_csv(path, expected_length=None)
        assert info.value.line == 1

    def test_missing_file(self, tmp_path):
        """A missing file is a data error."""
        with pytest.raises(DataError, match="not found"):
            read_trajectory_csv(tmp_path / "none.csv")


class TestDensityPrior:
    """Test per-primitive density priors."""

    def test_uniform(self):
        """Uniform priors put 1/100 on every slot."""
        prior = DensityPrior.uniform(3)
        assert len(prior) == 3
        np.testing.assert_allclose(prior.probabilities, 0.01)

    def test_rows_must_sum_to_one(self):
        """Rows off by more than 1e-9 are rejected."""
        probabilities = np.full((1, 100), 0.01)
        probabilities[0, 0] += 1e-6
        with pytest.raises(ValidationError, match="sum to 1"):
            DensityPrior(probabilities)

    def test_negative_probability(self):
        """Negative entries are rejected."""
        probabilities = np.full((1, 100), 0.01)
        probabilities[0, 0] = -0.01
        probabilities[0, 1] = 0.03
        with pytest.raises(ValidationError):
            DensityPrior(probabilities)

    def test_one_hot_sampling(self):
        """A one-hot prior always yields its slot."""
        prior = DensityPrior.one_hot([7, 93])
        slots = prior.sample(np.random.default_rng(0).random((20, 2)))
        assert (slots[:, 0] == 7).all()
        assert (slots[:, 1] == 93).all()

    def test_inverse_cdf_edges(self):
        """Uniforms at 0 and just below 1 map to the first and last slots."""
        prior = DensityPrior.uniform(1)
        slots = prior.sample([[0.0], [1.0 - 1e-12]])
        assert slots[:, 0].tolist() == [1, 100]

    def test_from_materials(self):
        """Material priors are uniform over the material's slots."""
        prior = DensityPrior.from_materials(['Wood'])
        assert np.count_nonzero(prior.probabilities[0]) == 10
        assert prior.probabilities[0, :10] == pytest.approx([0.1] * 10)

    def test_file_round_trip(self, tmp_path):
        """Priors are stored as a JSON array of probability vectors."""
        prior = DensityPrior.from_materials(['Brick', 'Metal'])
        restored = read_prior(write_prior(prior, tmp_path / "prior.json"))
        np.testing.assert_array_equal(restored.probabilities, prior.probabilities)

    def test_malformed_prior_file(self, tmp_path):
        """Invalid JSON reports its line."""
        path = tmp_path / "prior.json"
        path.write_text("[\n[0.5,\n")
        with pytest.raises(DataError):
            read_prior(path)
