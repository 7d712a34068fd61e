"""
Pose trajectories from 2D keypoint tracks: matching, PnP and extraction
"""

from .keypoints import (
    KEYPOINT_COLUMNS,
    MIN_VISIBLE_POINTS,
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
from .matching import match_points, matching_cost
from .pnp import PnPSolution, initial_pose_guess, linear_pose_estimate, solve_pnp_lm
from .extraction import (
    ExtractionResult,
    FrameError,
    extract_trajectory,
    render_keypoints,
    track_correspondences,
)

__all__ = [
    'KEYPOINT_COLUMNS',
    'MIN_VISIBLE_POINTS',
    'CameraIntrinsics',
    'KeypointFrame',
    'project_points',
    'read_intrinsics',
    'read_keypoints_csv',
    'read_model_points',
    'write_intrinsics',
    'write_keypoints_csv',
    'write_model_points',
    'match_points',
    'matching_cost',
    'PnPSolution',
    'initial_pose_guess',
    'linear_pose_estimate',
    'solve_pnp_lm',
    'ExtractionResult',
    'FrameError',
    'extract_trajectory',
    'render_keypoints',
    'track_correspondences',
]
