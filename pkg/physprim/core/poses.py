"""
Poses and trajectories, plus the trajectory CSV format

A trajectory is a sequence of poses (p_x, p_y, p_z, q_w, q_x, q_y, q_z)
sampled every ``dt`` seconds; pose ``k`` is the state after ``k + 1``
simulation steps.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..utils.error_handling import DataError, DomainError, ValidationError
from ..utils.rotations import canonical_quaternion, quat_to_matrix

TRAJECTORY_LENGTH = 256
SIMULATION_DT = 1.0 / 300.0
NUM_INTERACTIONS = 4
TRAJECTORY_COLUMNS = ['t', 'px', 'py', 'pz', 'qw', 'qx', 'qy', 'qz']


@dataclass(frozen=True)
class Pose:
    """Position (meters) and unit orientation quaternion stored with q_w >= 0."""

    position: Tuple[float, float, float]
    orientation: Tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        position = tuple(float(v) for v in self.position)
        if len(position) != 3 or not all(np.isfinite(position)):
            raise ValidationError("Invalid pose", [f"position {self.position} must be 3 finite values"])
        try:
            orientation = tuple(float(v) for v in canonical_quaternion(self.orientation))
        except ValueError as e:
            raise ValidationError("Invalid pose", [str(e)])
        object.__setattr__(self, 'position', position)
        object.__setattr__(self, 'orientation', orientation)

    @property
    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.orientation)

    def as_array(self) -> np.ndarray:
        return np.array(self.position + self.orientation)

    def transform(self, points) -> np.ndarray:
        """Map points (N, 3) from the posed frame into the parent frame."""
        return np.asarray(points, dtype=float) @ self.rotation_matrix.T + np.asarray(self.position)

    @classmethod
    def from_array(cls, values) -> "Pose":
        values = np.asarray(values, dtype=float)
        return cls(tuple(values[:3]), tuple(values[3:7]))


class Trajectory:
    """
    Timestamped pose sequence from one physics interaction.

    Poses are kept as an (N, 7) array with canonical quaternions. The
    standard length is 256 at dt = 1/300 s; other lengths are accepted for
    explicitly overridden simulator settings.
    """

    def __init__(self, poses, dt: float = SIMULATION_DT, interaction_id: Optional[int] = None):
        array = np.array(poses, dtype=float)
        if array.ndim != 2 or array.shape[1] != 7 or array.shape[0] == 0:
            raise ValidationError("Invalid trajectory", [f"poses must have shape (N, 7), got {array.shape}"])
        if not np.all(np.isfinite(array)):
            raise ValidationError("Invalid trajectory", ["poses must be finite"])
        if dt <= 0:
            raise ValidationError("Invalid trajectory", [f"dt must be positive, got {dt}"])
        if interaction_id is not None and not 0 <= interaction_id < NUM_INTERACTIONS:
            raise ValidationError("Invalid trajectory", [f"interaction_id {interaction_id} outside 0..3"])
        quats = array[:, 3:]
        norms = np.linalg.norm(quats, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValidationError("Invalid trajectory", ["zero quaternion in poses"])
        # leave already-unit quaternions untouched so stored values round-trip bitwise
        drifted = np.abs(norms[:, 0] - 1.0) > 1e-12
        quats[drifted] = quats[drifted] / norms[drifted]
        quats[quats[:, 0] < 0.0] *= -1.0
        array[:, 3:] = quats
        array.setflags(write=False)
        self._poses = array
        self.dt = float(dt)
        self.interaction_id = interaction_id

    def __len__(self):
        return self._poses.shape[0]

    def __getitem__(self, index) -> Pose:
        return Pose.from_array(self._poses[index])

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (self.dt == other.dt and self.interaction_id == other.interaction_id
                and np.array_equal(self._poses, other._poses))

    def __repr__(self):
        return f"Trajectory({len(self)} poses, dt={self.dt:.6g}, interaction={self.interaction_id})"

    @property
    def poses(self) -> np.ndarray:
        return self._poses

    @property
    def positions(self) -> np.ndarray:
        return self._poses[:, :3]

    @property
    def orientations(self) -> np.ndarray:
        return self._poses[:, 3:]

    @property
    def times(self) -> np.ndarray:
        return (np.arange(len(self)) + 1) * self.dt

    @property
    def is_standard(self) -> bool:
        return len(self) == TRAJECTORY_LENGTH and self.dt == SIMULATION_DT

    def to_dataframe(self) -> pd.DataFrame:
        frame = pd.DataFrame(self._poses, columns=TRAJECTORY_COLUMNS[1:])
        frame.insert(0, 't', self.times)
        return frame


def write_trajectory_csv(trajectory: Trajectory, path: Union[str, Path]) -> Path:
    """
    Write the trajectory CSV with header ``t,px,py,pz,qw,qx,qy,qz``.

    Time stamps carry 9 significant digits; pose values are written with 17
    so that a re-read trajectory is bitwise identical to the simulated one.
    """
    from ..utils.data_processing import atomic_write_text

    frame = trajectory.to_dataframe()
    frame['t'] = [f"{t:.9g}" for t in frame['t']]
    text = frame.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    return atomic_write_text(path, text)


def read_trajectory_csv(path: Union[str, Path], interaction_id: Optional[int] = None,
                        expected_length: Optional[int] = TRAJECTORY_LENGTH) -> Trajectory:
    """Read a trajectory CSV; dt is recovered from the first time stamp."""
    path = Path(path)
    if not path.exists():
        raise DataError("Trajectory file not found", path=str(path))
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Unreadable trajectory CSV: {e}", path=str(path))
    if list(frame.columns) != TRAJECTORY_COLUMNS:
        raise DataError(f"Trajectory header must be {','.join(TRAJECTORY_COLUMNS)}", path=str(path), line=1)
    if expected_length is not None and len(frame) != expected_length:
        raise DataError(f"Trajectory has {len(frame)} rows, expected {expected_length}", path=str(path))
    if len(frame) == 0:
        raise DataError("Trajectory has no rows", path=str(path))
    # times are written with 9 significant digits; snap dt back onto 1/300 when it matches
    dt = float(frame['t'].iloc[0])
    if abs(dt - SIMULATION_DT) < 1e-9:
        dt = SIMULATION_DT
    try:
        return Trajectory(frame[TRAJECTORY_COLUMNS[1:]].to_numpy(), dt=dt, interaction_id=interaction_id)
    except (ValidationError, DomainError) as e:
        raise DataError(str(e), path=str(path))


def stack_trajectories(trajectories: Sequence[Trajectory]) -> np.ndarray:
    """Stack pose arrays into shape (T, N, 7)."""
    return np.stack([t.poses for t in trajectories])
