"""
Tests for keypoint I/O, matching, PnP and trajectory extraction
"""
import itertools
import warnings

import numpy as np
import pytest

from physprim.core.poses import Pose, Trajectory
from physprim.core.primitives import Primitive
from physprim.tracking.extraction import extract_trajectory, render_keypoints, track_correspondences
from physprim.tracking.keypoints import (
    CameraIntrinsics,
    KeypointFrame,
    project_points,
    read_intrinsics,
    read_keypoints_csv,
    read_model_points,
    write_intrinsics,
    write_keypoints_csv,
    write_model_points,
)
from physprim.tracking.matching import match_points, matching_cost
from physprim.tracking.pnp import initial_pose_guess, linear_pose_estimate, solve_pnp_lm
from physprim.utils.error_handling import DataError, DegenerateConfigurationError, DomainError, ValidationError
from physprim.utils.rotations import quat_from_axis_angle, quat_to_matrix

CAMERA = CameraIntrinsics(fx=800.0, fy=800.0, cx=320.0, cy=240.0)


@pytest.fixture
def cube_points():
    """Corners of a 0.4 m cube centred on the origin."""
    return Primitive(size=(0.4, 0.4, 0.4)).corners()


@pytest.fixture
def extrinsics():
    """Camera five metres away, tilted about its x axis."""
    return Pose((0.0, 0.0, 5.0), tuple(quat_from_axis_angle((1.0, 0.0, 0.0), 0.3)))


@pytest.fixture
def slow_motion():
    """32 poses drifting in x and y while turning about z."""
    k = np.arange(32)
    poses = np.zeros((32, 7))
    poses[:, 0] = 0.001 * k
    poses[:, 1] = 0.0005 * k
    poses[:, 3:] = [quat_from_axis_angle((0.0, 0.0, 1.0), 0.002 * i) for i in k]
    return Trajectory(poses)


@pytest.fixture
def rendered(two_block_tower, slow_motion, extrinsics):
    """Model points and the keypoint frames they project to."""
    model_points = two_block_tower.corners()
    return model_points, render_keypoints(slow_motion, model_points, CAMERA, extrinsics)


def hide_points(frame, keep):
    visible = np.zeros(len(frame), dtype=bool)
    visible[:keep] = True
    return KeypointFrame(frame.frame, frame.points, visible)


class TestCameraIntrinsics:
    """Test the pinhole camera."""

    def test_matrix(self):
        """The calibration matrix holds focal lengths and principal point."""
        np.testing.assert_allclose(CAMERA.matrix, [[800.0, 0.0, 320.0], [0.0, 800.0, 240.0], [0.0, 0.0, 1.0]])

    def test_project(self):
        """Points on the optical axis land on the principal point."""
        pixels = CAMERA.project([[0.0, 0.0, 2.0], [1.0, -0.5, 4.0]])
        np.testing.assert_allclose(pixels, [[320.0, 240.0], [520.0, 140.0]])

    def test_behind_camera(self):
        """Points at or behind the camera plane cannot be projected."""
        with pytest.raises(DomainError, match="behind"):
            CAMERA.project([[0.0, 0.0, 0.0]])

    def test_invalid_focal_length(self):
        """Focal lengths must be positive."""
        with pytest.raises(ValidationError, match="focal"):
            CameraIntrinsics(fx=0.0, fy=800.0, cx=0.0, cy=0.0)

    def test_project_points_uses_pose(self, cube_points):
        """project_points moves object points into the camera before projecting."""
        pose = Pose((0.0, 0.0, 3.0))
        np.testing.assert_allclose(project_points(cube_points, pose, CAMERA),
                                   CAMERA.project(cube_points + [0.0, 0.0, 3.0]))


class TestKeypointFrame:
    """Test per-frame detections."""

    def test_defaults_visible(self):
        """Without flags every point is visible."""
        frame = KeypointFrame(0, np.zeros((5, 2)))
        assert frame.num_visible == 5
        assert frame.solvable

    def test_flag_count(self):
        """One visibility flag per point."""
        with pytest.raises(ValidationError, match="visibility flags"):
            KeypointFrame(0, np.zeros((4, 2)), [True, False])

    def test_invisible_may_be_nan(self):
        """Only visible points need finite coordinates."""
        points = np.array([[1.0, 2.0], [np.nan, np.nan]])
        frame = KeypointFrame(0, points, [True, False])
        assert not frame.solvable
        with pytest.raises(ValidationError, match="finite"):
            KeypointFrame(0, points)

    def test_permuted(self):
        """Point i of the permuted frame is point order[i]."""
        frame = KeypointFrame(3, [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], [True, True, False])
        permuted = frame.permuted([2, 0, 1])
        np.testing.assert_array_equal(permuted.points[:, 0], [2.0, 0.0, 1.0])
        assert permuted.visible.tolist() == [False, True, True]
        assert permuted.frame == 3


class TestKeypointFiles:
    """Test keypoint, intrinsics and model point files."""

    def test_keypoints_round_trip(self, tmp_path):
        """Points and visibility survive a write and read."""
        frames = [
            KeypointFrame(0, [[1.25, 2.5], [3.0, 4.0]]),
            KeypointFrame(1, [[1.5, 2.75], [0.1, 0.2]], [True, False]),
        ]
        path = write_keypoints_csv(frames, tmp_path / "keypoints.csv")
        restored = read_keypoints_csv(path)
        assert [f.frame for f in restored] == [0, 1]
        for got, expected in zip(restored, frames):
            np.testing.assert_array_equal(got.points, expected.points)
            np.testing.assert_array_equal(got.visible, expected.visible)

    def test_bad_header(self, tmp_path):
        """The header is checked on line 1."""
        path = tmp_path / "keypoints.csv"
        path.write_text("frame,id,u,v\n0,0,1,1\n")
        with pytest.raises(DataError) as info:
            read_keypoints_csv(path)
        assert info.value.line == 1

    def test_inconsistent_point_ids(self, tmp_path):
        """Every frame must list the same point ids; the first bad row is reported."""
        path = tmp_path / "keypoints.csv"
        path.write_text("frame,point_id,u,v,visible\n0,0,1,1,1\n0,1,2,2,1\n1,0,1,1,1\n1,2,2,2,1\n")
        with pytest.raises(DataError, match="point ids") as info:
            read_keypoints_csv(path)
        assert info.value.line == 4

    def test_missing_keypoints(self, tmp_path):
        """A missing keypoint file is a data error."""
        with pytest.raises(DataError, match="not found"):
            read_keypoints_csv(tmp_path / "missing.csv")

    def test_intrinsics_round_trip(self, tmp_path):
        """Intrinsics are stored as a JSON object."""
        path = write_intrinsics(CAMERA, tmp_path / "camera.json")
        assert read_intrinsics(path) == CAMERA

    def test_intrinsics_missing_field(self, tmp_path):
        """Incomplete intrinsics are a data error."""
        path = tmp_path / "camera.json"
        path.write_text('{"fx": 800, "fy": 800, "cx": 320}')
        with pytest.raises(DataError, match="intrinsics"):
            read_intrinsics(path)

    def test_model_points_round_trip(self, tmp_path, cube_points):
        """Model points are written under a 'points' key."""
        path = write_model_points(cube_points, tmp_path / "model.json")
        np.testing.assert_array_equal(read_model_points(path), cube_points)

    def test_model_points_bare_array(self, tmp_path, cube_points):
        """A bare JSON array is accepted too."""
        path = tmp_path / "model.json"
        path.write_text(str(cube_points.tolist()))
        assert read_model_points(path).shape == (8, 3)

    def test_too_few_model_points(self, tmp_path):
        """At least four model points are needed."""
        path = tmp_path / "model.json"
        path.write_text("[[0, 0, 0], [1, 0, 0], [0, 1, 0]]")
        with pytest.raises(DataError, match="shape"):
            read_model_points(path)


class TestMatching:
    """Test frame-to-frame point correspondence."""

    def test_recovers_permutation(self, rng):
        """Shuffled, slightly moved points are matched back to their origin."""
        prev = KeypointFrame(0, rng.uniform(0.0, 500.0, size=(10, 2)))
        order = rng.permutation(10)
        curr = KeypointFrame(1, prev.points[order] + 0.5)
        assignment = match_points(prev, curr)
        np.testing.assert_allclose(curr.points[assignment], prev.points + 0.5)
        assert matching_cost(prev, curr, assignment) == pytest.approx(10 * np.sqrt(0.5))

    def test_invisible_points_fill_in_order(self):
        """Points hidden in either frame take the leftover indices in order."""
        prev = KeypointFrame(0, [[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]], [True, True, False])
        curr = KeypointFrame(1, [[10.0, 0.0], [20.0, 0.0], [0.0, 0.0]], [True, False, True])
        assignment = match_points(prev, curr)
        assert assignment.tolist() == [2, 0, 1]

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_matches_brute_force(self, rng, n):
        """The assignment costs no more than the best of all permutations."""
        for _ in range(20):
            prev = KeypointFrame(0, rng.uniform(0.0, 100.0, size=(n, 2)))
            curr = KeypointFrame(1, rng.uniform(0.0, 100.0, size=(n, 2)))
            best = min(matching_cost(prev, curr, order) for order in itertools.permutations(range(n)))
            assert matching_cost(prev, curr, match_points(prev, curr)) == pytest.approx(best, rel=1e-12)

    def test_point_count_mismatch(self):
        """Frames must hold the same number of points."""
        with pytest.raises(DomainError, match="Cannot match"):
            match_points(KeypointFrame(0, np.zeros((4, 2))), KeypointFrame(1, np.zeros((5, 2))))

    def test_nothing_visible_costs_zero(self):
        """Assignments over no shared visible points cost nothing."""
        prev = KeypointFrame(0, np.zeros((2, 2)), [False, False])
        assert matching_cost(prev, prev, [0, 1]) == 0.0


class TestPnP:
    """Test pose estimation from 2D-3D correspondences."""

    @pytest.fixture
    def truth(self):
        return Pose((0.1, -0.2, 3.0), tuple(quat_from_axis_angle((1.0, 2.0, 3.0), 0.4)))

    def test_solve_exact(self, cube_points, truth):
        """Noise-free correspondences give back the pose."""
        solution = solve_pnp_lm(cube_points, project_points(cube_points, truth, CAMERA), CAMERA)
        assert solution.converged
        assert solution.reprojection_rms < 1e-6
        np.testing.assert_allclose(solution.pose.as_array(), truth.as_array(), atol=1e-6)

    def test_random_poses_recovered(self, rng, cube_points):
        """Noise-free pixels give the pose back to 1e-6 rad and 1e-8 m."""
        for _ in range(100):
            truth = Pose(
                (rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(2.5, 4.0)),
                tuple(quat_from_axis_angle(rng.normal(size=3), rng.uniform(0.0, np.pi))),
            )
            solution = solve_pnp_lm(cube_points, project_points(cube_points, truth, CAMERA), CAMERA)
            relative = quat_to_matrix(solution.pose.orientation) @ quat_to_matrix(truth.orientation).T
            axis = np.array([relative[2, 1] - relative[1, 2], relative[0, 2] - relative[2, 0],
                             relative[1, 0] - relative[0, 1]])
            assert np.trace(relative) > 1.0
            assert np.arcsin(min(1.0, np.linalg.norm(axis) / 2.0)) < 1e-6
            assert np.linalg.norm(np.subtract(solution.pose.position, truth.position)) < 1e-8

    def test_solve_from_rough_guess(self, cube_points):
        """Starting from the centroid guess still converges."""
        truth = Pose((0.05, 0.0, 3.0), tuple(quat_from_axis_angle((0.0, 1.0, 0.0), 0.2)))
        pixels = project_points(cube_points, truth, CAMERA)
        solution = solve_pnp_lm(cube_points, pixels, CAMERA, initial=initial_pose_guess(cube_points, pixels, CAMERA))
        assert solution.converged
        np.testing.assert_allclose(solution.pose.as_array(), truth.as_array(), atol=1e-6)

    def test_iteration_cap_warns(self, cube_points):
        """Hitting the iteration cap returns the best pose with a warning."""
        truth = Pose((0.05, 0.0, 3.0), tuple(quat_from_axis_angle((0.0, 1.0, 0.0), 0.2)))
        pixels = project_points(cube_points, truth, CAMERA)
        with pytest.warns(RuntimeWarning, match="did not converge"):
            solution = solve_pnp_lm(cube_points, pixels, CAMERA,
                                    initial=initial_pose_guess(cube_points, pixels, CAMERA), max_iterations=1)
        assert not solution.converged
        assert solution.iterations == 1

    def test_too_few_points(self, cube_points, truth):
        """Three correspondences do not fix a pose."""
        pixels = project_points(cube_points, truth, CAMERA)
        with pytest.raises(DegenerateConfigurationError, match="at least 4"):
            solve_pnp_lm(cube_points[:3], pixels[:3], CAMERA)

    def test_shape_mismatch(self, cube_points):
        """Point arrays must pair up."""
        with pytest.raises(DomainError, match="matching"):
            solve_pnp_lm(cube_points, np.zeros((7, 2)), CAMERA)

    def test_initial_behind_camera(self, cube_points, truth):
        """A starting pose behind the camera is rejected."""
        pixels = project_points(cube_points, truth, CAMERA)
        with pytest.raises(DomainError, match="behind"):
            solve_pnp_lm(cube_points, pixels, CAMERA, initial=Pose((0.0, 0.0, -3.0)))

    def test_linear_estimate_exact(self, cube_points, truth):
        """The direct linear estimate is exact on noise-free data."""
        estimate = linear_pose_estimate(cube_points, project_points(cube_points, truth, CAMERA), CAMERA)
        np.testing.assert_allclose(estimate.as_array(), truth.as_array(), atol=1e-6)

    def test_linear_estimate_needs_depth(self, truth):
        """Coplanar points and fewer than six points give no estimate."""
        plane = np.array([[x, y, 0.0] for x in (-0.2, 0.0, 0.2) for y in (-0.2, 0.2)])
        assert linear_pose_estimate(plane, project_points(plane, truth, CAMERA), CAMERA) is None
        assert linear_pose_estimate(plane[:5], project_points(plane[:5], truth, CAMERA), CAMERA) is None

    def test_initial_guess_in_front(self, cube_points):
        """The centroid guess places the model in front of the camera near its depth."""
        pixels = project_points(cube_points, Pose((0.0, 0.0, 3.0)), CAMERA)
        guess = initial_pose_guess(cube_points, pixels, CAMERA)
        assert 1.5 < guess.position[2] < 6.0
        assert guess.position[0] == pytest.approx(0.0, abs=1e-9)


class TestExtractTrajectory:
    """Test trajectory reconstruction from keypoint frames."""

    def test_world_round_trip(self, rendered, slow_motion, extrinsics):
        """Rendered keypoints give back the world trajectory."""
        model_points, frames = rendered
        result = extract_trajectory(frames, model_points, CAMERA, extrinsics=extrinsics, length=32,
                                    interaction_id=2)
        np.testing.assert_allclose(result.trajectory.poses, slow_motion.poses, atol=1e-6)
        assert result.num_gaps == 0
        assert result.errors == []
        assert result.trajectory.interaction_id == 2

    def test_camera_frame_without_extrinsics(self, rendered, slow_motion, extrinsics):
        """Without extrinsics positions stay in the camera frame."""
        model_points, frames = rendered
        result = extract_trajectory(frames, model_points, CAMERA, length=32)
        expected = extrinsics.transform(slow_motion.positions)
        np.testing.assert_allclose(result.trajectory.positions, expected, atol=1e-6)

    def test_parallel_matches_sequential(self, rendered):
        """Independent per-frame solves agree with warm-started ones."""
        model_points, frames = rendered
        sequential = extract_trajectory(frames, model_points, CAMERA, length=32)
        parallel = extract_trajectory(frames, model_points, CAMERA, length=32, parallel=True, max_workers=2)
        np.testing.assert_allclose(parallel.trajectory.poses, sequential.trajectory.poses, atol=1e-6)

    def test_shuffled_detections(self, rendered, slow_motion, extrinsics):
        """An initial assignment orders detections; later frames follow by matching."""
        model_points, frames = rendered
        order = np.array([5, 3, 0, 7, 1, 2, 6, 4, 8, 9, 10, 11, 12, 13, 15, 14])
        shuffled = [frame.permuted(order) for frame in frames]
        result = extract_trajectory(shuffled, model_points, CAMERA, extrinsics=extrinsics, length=32,
                                    initial_assignment=np.argsort(order))
        np.testing.assert_allclose(result.trajectory.poses, slow_motion.poses, atol=1e-6)

    def test_gap_interpolated(self, rendered, slow_motion, extrinsics):
        """An unsolvable frame is flagged, reported and interpolated with a warning."""
        model_points, frames = rendered
        frames[10] = hide_points(frames[10], keep=3)
        with pytest.warns(RuntimeWarning, match="interpolated"):
            result = extract_trajectory(frames, model_points, CAMERA, extrinsics=extrinsics, length=32)
        assert result.gaps[10]
        assert not result.gaps[9] and not result.gaps[11]
        assert [e.frame for e in result.errors] == [10]
        assert "3 visible points" in result.errors[0].message
        assert result.solutions[10] is None
        np.testing.assert_allclose(result.trajectory.poses, slow_motion.poses, atol=1e-6)

    def test_resampling(self, rendered, slow_motion, extrinsics):
        """A 150 Hz video is resampled onto the 300 Hz clock."""
        model_points, frames = rendered
        result = extract_trajectory(frames, model_points, CAMERA, extrinsics=extrinsics, frame_rate=150.0,
                                    length=32)
        midpoint = 0.5 * (slow_motion.positions[0] + slow_motion.positions[1])
        np.testing.assert_allclose(result.trajectory.positions[1], midpoint, atol=1e-6)
        np.testing.assert_allclose(result.trajectory.positions[2], slow_motion.positions[1], atol=1e-6)

    def test_short_video_holds_last_pose(self, rendered, slow_motion, extrinsics):
        """Samples after the last frame repeat its pose."""
        model_points, frames = rendered
        result = extract_trajectory(frames, model_points, CAMERA, extrinsics=extrinsics, length=40)
        assert len(result.trajectory) == 40
        np.testing.assert_allclose(result.trajectory.poses[-1], slow_motion.poses[-1], atol=1e-6)

    def test_verbose(self, rendered, capsys):
        """Verbose extraction prints a summary."""
        model_points, frames = rendered
        extract_trajectory(frames, model_points, CAMERA, length=32, verbose=True)
        assert "Extracted 32 poses from 32 frames" in capsys.readouterr().out

    def test_no_frames(self, cube_points):
        """There must be frames to extract from."""
        with pytest.raises(DomainError, match="No keypoint frames"):
            extract_trajectory([], cube_points, CAMERA)

    def test_unordered_frames(self, rendered):
        """Frames must be in increasing order."""
        model_points, frames = rendered
        with pytest.raises(DomainError, match="increasing"):
            extract_trajectory([frames[1], frames[0]], model_points, CAMERA)

    def test_model_count_mismatch(self, rendered):
        """The model needs one point per keypoint."""
        model_points, frames = rendered
        with pytest.raises(DomainError, match="model points"):
            extract_trajectory(frames, model_points[:8], CAMERA)

    def test_nothing_solvable(self, rendered):
        """Extraction fails when no frame yields a pose."""
        model_points, frames = rendered
        hidden = [hide_points(frame, keep=3) for frame in frames]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            with pytest.raises(DegenerateConfigurationError, match="No frame"):
                extract_trajectory(hidden, model_points, CAMERA)

    def test_bad_initial_assignment(self, rendered):
        """The initial assignment must be a permutation."""
        model_points, frames = rendered
        with pytest.raises(DomainError, match="permutation"):
            track_correspondences(frames, initial_assignment=[0] * 16)
