"""
Pose trajectories from tracked 2D keypoints

Correspondence is carried from the first frame by matching every frame to
the last known keypoint positions; each frame's pose is then solved by PnP
and expressed in the world frame. Frames that cannot be solved become gaps
filled by interpolation, and the sequence is resampled onto the simulator
clock.
"""

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .keypoints import CameraIntrinsics, KeypointFrame
from .matching import match_points
from .pnp import PnPSolution, solve_pnp_lm
from ..core.poses import SIMULATION_DT, TRAJECTORY_LENGTH, Pose, Trajectory
from ..utils.batch_processing import parallel_map
from ..utils.error_handling import DegenerateConfigurationError, DomainError
from ..utils.rotations import quat_multiply, quat_slerp, quat_to_matrix

SIMULATION_RATE = 1.0 / SIMULATION_DT


@dataclass(frozen=True)
class FrameError:
    frame: int
    message: str


@dataclass
class ExtractionResult:
    """Extracted trajectory, per-sample gap flags and per-frame error records."""

    trajectory: Trajectory
    gaps: np.ndarray
    errors: List[FrameError] = field(default_factory=list)
    solutions: List[Optional[PnPSolution]] = field(default_factory=list, repr=False)

    @property
    def num_gaps(self) -> int:
        return int(np.count_nonzero(self.gaps))


def track_correspondences(frames: Sequence[KeypointFrame],
                          initial_assignment: Optional[Sequence[int]] = None
                          ) -> Tuple[List[Optional[KeypointFrame]], List[FrameError]]:
    """
    Reorder each frame's detections so that point ``i`` is model point ``i``.

    The first frame is ordered by ``initial_assignment`` (identity if None);
    later frames are matched against the last known position of every point.
    Frames with a different point count are returned as None with an error.
    """
    first = frames[0]
    n = len(first)
    order = np.arange(n) if initial_assignment is None else np.asarray(initial_assignment, dtype=int)
    if sorted(order.tolist()) != list(range(n)):
        raise DomainError(f"initial assignment {order.tolist()} is not a permutation of 0..{n - 1}")

    ordered: List[Optional[KeypointFrame]] = [first.permuted(order)]
    errors: List[FrameError] = []
    last_known = np.where(ordered[0].visible[:, np.newaxis], ordered[0].points, np.nan)
    known = ordered[0].visible.copy()

    for frame in frames[1:]:
        if len(frame) != n:
            errors.append(FrameError(frame.frame, f"frame has {len(frame)} points, expected {n}"))
            ordered.append(None)
            continue
        reference = KeypointFrame(frame.frame, np.nan_to_num(last_known), known)
        current = frame.permuted(match_points(reference, frame))
        last_known[current.visible] = current.points[current.visible]
        known = known | current.visible
        ordered.append(current)
    return ordered, errors


def _solve_frame(frame: Optional[KeypointFrame], model_points, intrinsics: CameraIntrinsics,
                 initial: Optional[Pose]):
    if frame is None:
        return None, None
    if not frame.solvable:
        return None, f"only {frame.num_visible} visible points"
    visible = frame.visible
    try:
        return solve_pnp_lm(model_points[visible], frame.points[visible], intrinsics, initial), None
    except (DegenerateConfigurationError, DomainError) as e:
        return None, str(e)


def _to_world(pose: Pose, extrinsics: Optional[Pose]) -> np.ndarray:
    """Camera-frame object pose to a world pose, given the world-to-camera extrinsics."""
    if extrinsics is None:
        return pose.as_array()
    camera_rotation = extrinsics.rotation_matrix
    position = camera_rotation.T @ (np.asarray(pose.position) - np.asarray(extrinsics.position))
    inverse = np.array([extrinsics.orientation[0], *(-np.asarray(extrinsics.orientation[1:]))])
    orientation = quat_multiply(inverse, pose.orientation)
    if orientation[0] < 0.0:
        orientation = -orientation
    return np.concatenate([position, orientation])


def _interpolate(poses: np.ndarray, times: np.ndarray, query: float) -> np.ndarray:
    """Pose at ``query`` by linear/spherical interpolation; held beyond the ends."""
    if query <= times[0]:
        return poses[0].copy()
    if query >= times[-1]:
        return poses[-1].copy()
    upper = int(np.searchsorted(times, query, side='left'))
    if times[upper] == query:
        return poses[upper].copy()
    lower = upper - 1
    fraction = (query - times[lower]) / (times[upper] - times[lower])
    position = poses[lower, :3] + fraction * (poses[upper, :3] - poses[lower, :3])
    orientation = quat_slerp(poses[lower, 3:], poses[upper, 3:], fraction)
    return np.concatenate([position, orientation])


def extract_trajectory(frames: Sequence[KeypointFrame], model_points, intrinsics: CameraIntrinsics,
                       initial_assignment: Optional[Sequence[int]] = None,
                       extrinsics: Optional[Pose] = None, frame_rate: float = SIMULATION_RATE,
                       length: int = TRAJECTORY_LENGTH, parallel: bool = False,
                       max_workers: Optional[int] = None, interaction_id: Optional[int] = None,
                       verbose: bool = False) -> ExtractionResult:
    """
    Reconstruct a pose trajectory from per-frame keypoint detections.

    Args:
        frames: Detections in increasing frame order
        model_points: Object-frame positions of the tracked points (N, 3)
        intrinsics: Camera intrinsics
        initial_assignment: Detection index of each model point in the first frame
        extrinsics: World-to-camera pose; poses stay in the camera frame if None
        frame_rate: Video frame rate (Hz); output is resampled to 300 Hz
        length: Output length; shorter videos hold their last pose
        parallel: Solve frames concurrently from the default initial guess
            instead of warm-starting each frame from the previous pose
        max_workers: Worker threads in parallel mode
        interaction_id: Interaction index stored on the trajectory
        verbose: Print a summary line

    Returns:
        ExtractionResult; gap samples are interpolated from solved frames
        (position linearly, orientation spherically) and flagged

    Raises:
        DomainError: empty or unordered frames, or model/keypoint count mismatch
        DegenerateConfigurationError: no frame could be solved
    """
    frames = list(frames)
    if not frames:
        raise DomainError("No keypoint frames to extract from")
    indices = np.array([f.frame for f in frames])
    if np.any(np.diff(indices) <= 0):
        raise DomainError("Keypoint frames must be in strictly increasing frame order")
    if frame_rate <= 0:
        raise DomainError(f"frame_rate must be positive, got {frame_rate}")
    model_points = np.asarray(model_points, dtype=float)
    if len(model_points) != len(frames[0]):
        raise DomainError(f"{len(model_points)} model points for {len(frames[0])} keypoints per frame")

    ordered, errors = track_correspondences(frames, initial_assignment)

    solutions: List[Optional[PnPSolution]] = []
    if parallel:
        results = parallel_map(lambda frame: _solve_frame(frame, model_points, intrinsics, None),
                               ordered, max_workers=max_workers, desc="Solving frames")
    else:
        results = []
        warm_start = None
        for frame in ordered:
            solution, message = _solve_frame(frame, model_points, intrinsics, warm_start)
            if solution is not None:
                warm_start = solution.pose
            results.append((solution, message))
    for frame, (solution, message) in zip(frames, results):
        solutions.append(solution)
        if message is not None:
            errors.append(FrameError(frame.frame, message))
    errors.sort(key=lambda e: e.frame)

    solved = [i for i, s in enumerate(solutions) if s is not None]
    if not solved:
        raise DegenerateConfigurationError("No frame could be solved for a pose")
    gap_frames = np.array([s is None for s in solutions])
    if gap_frames.any():
        warnings.warn(f"{int(gap_frames.sum())} of {len(frames)} frames could not be solved; "
                      f"their poses are interpolated", RuntimeWarning, stacklevel=2)

    solved_times = indices[solved].astype(float)
    solved_poses = np.array([_to_world(solutions[i].pose, extrinsics) for i in solved])

    samples = indices[0] + np.arange(length) * frame_rate / SIMULATION_RATE
    poses = np.array([_interpolate(solved_poses, solved_times, s) for s in samples])
    gaps = np.zeros(length, dtype=bool)
    for k, s in enumerate(samples):
        # a sample is a gap when it is not bracketed by solved frames next to each other
        lower = np.searchsorted(indices, s, side='right') - 1
        upper = np.searchsorted(indices, s, side='left')
        lower, upper = max(lower, 0), min(upper, len(indices) - 1)
        gaps[k] = bool(gap_frames[lower] or gap_frames[upper])

    if verbose:
        print(f"✅ Extracted {length} poses from {len(frames)} frames "
              f"({int(gap_frames.sum())} gap frames, {len(errors)} errors)")
    return ExtractionResult(
        trajectory=Trajectory(poses, dt=SIMULATION_DT, interaction_id=interaction_id),
        gaps=gaps,
        errors=errors,
        solutions=solutions,
    )


def render_keypoints(trajectory: Trajectory, model_points, intrinsics: CameraIntrinsics,
                     extrinsics: Pose, first_frame: int = 0) -> List[KeypointFrame]:
    """Project a trajectory's model points into the camera, one frame per pose."""
    model_points = np.asarray(model_points, dtype=float)
    camera_rotation = extrinsics.rotation_matrix
    frames = []
    for k, pose in enumerate(trajectory.poses):
        world = model_points @ quat_to_matrix(pose[3:]).T + pose[:3]
        camera = world @ camera_rotation.T + np.asarray(extrinsics.position)
        frames.append(KeypointFrame(first_frame + k, intrinsics.project(camera)))
    return frames
