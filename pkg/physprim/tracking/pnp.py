"""
Perspective-n-Point pose estimation with Levenberg-Marquardt

The pose maps object-frame model points into the camera frame. Rotation
updates are small rotation vectors composed onto the quaternion, which is
renormalized after every step.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .keypoints import MIN_VISIBLE_POINTS, CameraIntrinsics
from ..core.poses import Pose
from ..utils.error_handling import DegenerateConfigurationError, DomainError
from ..utils.rotations import (
    canonical_quaternion,
    quat_from_matrix,
    quat_from_rotvec,
    quat_multiply,
    quat_to_matrix,
    skew,
)

INITIAL_DAMPING = 1e-3
DAMPING_FACTOR = 10.0
STEP_TOLERANCE = 1e-10
MAX_ITERATIONS = 100
POSE_DOF = 6
LINEAR_MIN_POINTS = 6
LINEAR_RANK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PnPSolution:
    pose: Pose
    reprojection_rms: float
    iterations: int
    converged: bool


def _residuals(points3d, points2d, intrinsics: CameraIntrinsics, translation, quaternion):
    camera = points3d @ quat_to_matrix(quaternion).T + translation
    if np.any(camera[:, 2] <= 0.0):
        return None, camera
    projected = np.column_stack([
        intrinsics.fx * camera[:, 0] / camera[:, 2] + intrinsics.cx,
        intrinsics.fy * camera[:, 1] / camera[:, 2] + intrinsics.cy,
    ])
    return (projected - points2d).ravel(), camera


def _jacobian(points3d, camera, intrinsics: CameraIntrinsics, quaternion) -> np.ndarray:
    """d(residual) / d(rotation vector, translation), shape (2N, 6)."""
    rotated = points3d @ quat_to_matrix(quaternion).T
    jacobian = np.empty((2 * len(points3d), POSE_DOF))
    for i, (point, (x, y, z)) in enumerate(zip(rotated, camera)):
        projection = np.array([
            [intrinsics.fx / z, 0.0, -intrinsics.fx * x / (z * z)],
            [0.0, intrinsics.fy / z, -intrinsics.fy * y / (z * z)],
        ])
        jacobian[2 * i:2 * i + 2, :3] = projection @ -skew(point)
        jacobian[2 * i:2 * i + 2, 3:] = projection
    return jacobian


def initial_pose_guess(points3d, points2d, intrinsics: CameraIntrinsics) -> Pose:
    """
    Identity rotation; translation placing the model centroid on the ray of
    the image centroid, at the depth where the spreads of both point sets agree.
    """
    points3d = np.asarray(points3d, dtype=float)
    points2d = np.asarray(points2d, dtype=float)
    model_centroid = points3d.mean(axis=0)
    image_centroid = points2d.mean(axis=0)
    model_spread = np.sqrt(np.mean(np.sum((points3d - model_centroid) ** 2, axis=1)))
    normalized = (points2d - image_centroid) / np.array([intrinsics.fx, intrinsics.fy])
    image_spread = np.sqrt(np.mean(np.sum(normalized ** 2, axis=1)))
    depth = model_spread / image_spread if image_spread > 0 else 1.0
    center = np.array([
        (image_centroid[0] - intrinsics.cx) * depth / intrinsics.fx,
        (image_centroid[1] - intrinsics.cy) * depth / intrinsics.fy,
        depth,
    ])
    return Pose(tuple(center - model_centroid))


def linear_pose_estimate(points3d, points2d, intrinsics: CameraIntrinsics) -> Optional[Pose]:
    """
    Direct linear estimate from six or more non-coplanar correspondences.

    The 3x4 projection matrix in normalized image coordinates is the null
    vector of the stacked constraints; its left block is projected onto the
    nearest rotation. Returns None for coplanar or too few points, or when
    the estimate puts a point behind the camera.
    """
    points3d = np.asarray(points3d, dtype=float)
    points2d = np.asarray(points2d, dtype=float)
    if len(points3d) < LINEAR_MIN_POINTS:
        return None
    centroid = points3d.mean(axis=0)
    homogeneous = np.column_stack([points3d - centroid, np.ones(len(points3d))])
    u = (points2d[:, 0] - intrinsics.cx) / intrinsics.fx
    v = (points2d[:, 1] - intrinsics.cy) / intrinsics.fy
    zeros = np.zeros_like(homogeneous)
    system = np.vstack([
        np.hstack([homogeneous, zeros, -u[:, np.newaxis] * homogeneous]),
        np.hstack([zeros, homogeneous, -v[:, np.newaxis] * homogeneous]),
    ])
    _, singular, vt = np.linalg.svd(system)
    if singular[-2] < LINEAR_RANK_TOLERANCE * singular[0]:
        return None

    projection = vt[-1].reshape(3, 4)
    if np.linalg.det(projection[:, :3]) < 0.0:
        projection = -projection
    u_r, scales, v_rt = np.linalg.svd(projection[:, :3])
    rotation = u_r @ v_rt
    translation = projection[:, 3] / scales.mean() - rotation @ centroid
    if np.any((points3d @ rotation.T + translation)[:, 2] <= 0.0):
        return None
    return Pose(tuple(translation), tuple(quat_from_matrix(rotation)))


def solve_pnp_lm(points3d, points2d, intrinsics: CameraIntrinsics,
                 initial: Optional[Pose] = None, max_iterations: int = MAX_ITERATIONS) -> PnPSolution:
    """
    Minimize the reprojection error of 2D-3D correspondences over the pose.

    Damping starts at 1e-3 and is divided by 10 after an accepted step and
    multiplied by 10 after a rejected one. Iteration stops when a step is
    shorter than 1e-10 or after ``max_iterations``; in the latter case the
    best pose so far is returned with a RuntimeWarning.

    Args:
        points3d: Model points (N, 3) in the object frame
        points2d: Their pixel positions (N, 2)
        intrinsics: Camera intrinsics
        initial: Starting pose (linear estimate, else ``initial_pose_guess``, if None)
        max_iterations: Iteration cap

    Returns:
        PnPSolution with the pose, RMS reprojection error (px), iteration
        count and convergence flag

    Raises:
        DegenerateConfigurationError: fewer than four correspondences, or a
            Jacobian without full rank at the starting pose
    """
    points3d = np.asarray(points3d, dtype=float)
    points2d = np.asarray(points2d, dtype=float)
    if points3d.ndim != 2 or points3d.shape[1] != 3 or points2d.shape != (len(points3d), 2):
        raise DomainError(f"Need matching (N, 3) and (N, 2) points, got {points3d.shape} and {points2d.shape}")
    if len(points3d) < MIN_VISIBLE_POINTS:
        raise DegenerateConfigurationError(
            f"PnP needs at least {MIN_VISIBLE_POINTS} correspondences, got {len(points3d)}")

    initial = (initial or linear_pose_estimate(points3d, points2d, intrinsics)
               or initial_pose_guess(points3d, points2d, intrinsics))
    translation = np.asarray(initial.position, dtype=float)
    quaternion = np.asarray(initial.orientation, dtype=float)
    residuals, camera = _residuals(points3d, points2d, intrinsics, translation, quaternion)
    if residuals is None:
        raise DomainError("Initial pose places model points behind the camera")

    jacobian = _jacobian(points3d, camera, intrinsics, quaternion)
    if np.linalg.matrix_rank(jacobian) < POSE_DOF:
        raise DegenerateConfigurationError(
            f"Correspondences of {len(points3d)} points do not constrain all six pose parameters")

    cost = float(residuals @ residuals)
    damping = INITIAL_DAMPING
    converged = False
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        normal = jacobian.T @ jacobian
        gradient = jacobian.T @ residuals
        step = np.linalg.solve(normal + damping * np.diag(np.diag(normal)), -gradient)

        new_quaternion = quat_multiply(quat_from_rotvec(step[:3]), quaternion)
        new_quaternion = new_quaternion / np.linalg.norm(new_quaternion)
        new_translation = translation + step[3:]
        new_residuals, new_camera = _residuals(points3d, points2d, intrinsics, new_translation, new_quaternion)
        new_cost = float(new_residuals @ new_residuals) if new_residuals is not None else np.inf

        if new_cost < cost:
            translation, quaternion = new_translation, new_quaternion
            residuals, cost = new_residuals, new_cost
            jacobian = _jacobian(points3d, new_camera, intrinsics, quaternion)
            damping /= DAMPING_FACTOR
        else:
            damping *= DAMPING_FACTOR

        if np.linalg.norm(step) < STEP_TOLERANCE or cost == 0.0:
            converged = True
            break

    if not converged:
        warnings.warn(f"PnP did not converge in {max_iterations} iterations "
                      f"(RMS {np.sqrt(cost / len(points3d)):.3g} px)", RuntimeWarning, stacklevel=2)

    return PnPSolution(
        pose=Pose(tuple(translation), tuple(canonical_quaternion(quaternion))),
        reprojection_rms=float(np.sqrt(cost / len(points3d))),
        iterations=iterations,
        converged=converged,
    )
