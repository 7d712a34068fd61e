"""
Distances between pose trajectories
"""

from typing import Sequence, Union

import numpy as np

from ..core.poses import Trajectory
from ..utils.error_handling import DomainError

DISTANCE_MODES = ('mse', 'mae')

TrajectoryLike = Union[Trajectory, np.ndarray]


def _poses(trajectory: TrajectoryLike) -> np.ndarray:
    if isinstance(trajectory, Trajectory):
        return trajectory.poses
    poses = np.asarray(trajectory, dtype=float)
    if poses.ndim != 2 or poses.shape[1] != 7:
        raise DomainError(f"Expected poses of shape (N, 7), got {poses.shape}")
    return poses


def align_quaternions(simulated: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """Flip simulated quaternions into the hemisphere of the observed ones, frame by frame."""
    flip = np.einsum('ij,ij->i', simulated, observed) < 0.0
    return np.where(flip[:, np.newaxis], -simulated, simulated)


def trajectory_distance(simulated: TrajectoryLike, observed: TrajectoryLike, mode: str = 'mse') -> float:
    """
    Mean squared ('mse') or absolute ('mae') error over all frames and the
    seven pose components, after per-frame quaternion hemisphere alignment.
    """
    if mode not in DISTANCE_MODES:
        raise DomainError(f"Unknown distance mode '{mode}'. Use one of {DISTANCE_MODES}")
    sim = _poses(simulated)
    obs = _poses(observed)
    if sim.shape != obs.shape:
        raise DomainError(f"Trajectory lengths differ: {sim.shape[0]} vs {obs.shape[0]}")
    aligned = np.concatenate([sim[:, :3], align_quaternions(sim[:, 3:], obs[:, 3:])], axis=1)
    difference = aligned - obs
    if mode == 'mse':
        return float(np.mean(difference * difference))
    return float(np.mean(np.abs(difference)))


def interaction_distances(simulated: Sequence[TrajectoryLike], observed: Sequence[TrajectoryLike],
                          mode: str = 'mse') -> np.ndarray:
    """Per-interaction distances of index-aligned trajectory lists."""
    if len(simulated) != len(observed):
        raise DomainError(f"{len(simulated)} simulated trajectories for {len(observed)} observations")
    return np.array([trajectory_distance(s, o, mode) for s, o in zip(simulated, observed)])
