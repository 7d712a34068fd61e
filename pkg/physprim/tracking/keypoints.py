"""
Camera intrinsics, per-frame 2D keypoints and their file formats

Keypoint CSV columns: ``frame,point_id,u,v,visible``. Intrinsics are a
JSON object ``{fx, fy, cx, cy}``; model points a JSON array of [x, y, z]
in the object frame.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..utils.data_processing import atomic_write_text, read_json, write_json
from ..utils.error_handling import DataError, DomainError, ValidationError
from ..utils.rotations import quat_to_matrix

KEYPOINT_COLUMNS = ['frame', 'point_id', 'u', 'v', 'visible']
MIN_VISIBLE_POINTS = 4


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        values = [self.fx, self.fy, self.cx, self.cy]
        violations = []
        if not all(np.isfinite(v) for v in values):
            violations.append("intrinsics must be finite")
        elif self.fx <= 0 or self.fy <= 0:
            violations.append(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if violations:
            raise ValidationError("Invalid camera intrinsics", violations)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def project(self, points_camera) -> np.ndarray:
        """Pixel coordinates (N, 2) of camera-frame points (N, 3) in front of the camera."""
        points = np.atleast_2d(np.asarray(points_camera, dtype=float))
        if np.any(points[:, 2] <= 0.0):
            raise DomainError("Cannot project points at or behind the camera plane")
        return np.column_stack([
            self.fx * points[:, 0] / points[:, 2] + self.cx,
            self.fy * points[:, 1] / points[:, 2] + self.cy,
        ])

    def to_dict(self) -> Dict[str, float]:
        return {'fx': self.fx, 'fy': self.fy, 'cx': self.cx, 'cy': self.cy}

    @classmethod
    def from_dict(cls, data: Dict) -> "CameraIntrinsics":
        try:
            return cls(float(data['fx']), float(data['fy']), float(data['cx']), float(data['cy']))
        except KeyError as e:
            raise ValidationError("Malformed intrinsics", [f"missing field {e}"])


def project_points(points3d, pose, intrinsics: CameraIntrinsics) -> np.ndarray:
    """
    Project object-frame points through a camera-frame pose.

    Args:
        points3d: Object points (N, 3)
        pose: Seven values (t_x, t_y, t_z, q_w, q_x, q_y, q_z) mapping object to camera frame
        intrinsics: Camera intrinsics

    Returns:
        Pixel coordinates (N, 2)
    """
    pose = np.asarray(pose.as_array() if hasattr(pose, 'as_array') else pose, dtype=float)
    rotation = quat_to_matrix(pose[3:] / np.linalg.norm(pose[3:]))
    camera = np.asarray(points3d, dtype=float) @ rotation.T + pose[:3]
    return intrinsics.project(camera)


@dataclass(frozen=True)
class KeypointFrame:
    """2D detections of the model points in one video frame, indexed by point id."""

    frame: int
    points: np.ndarray
    visible: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(-1, 2)
        visible = np.ones(len(points), dtype=bool) if self.visible is None else np.array(self.visible, dtype=bool)
        if visible.shape != (len(points),):
            raise ValidationError("Invalid keypoint frame", [f"{visible.size} visibility flags for {len(points)} points"])
        if not np.all(np.isfinite(points[visible])):
            raise ValidationError("Invalid keypoint frame", ["visible points must be finite"])
        points.setflags(write=False)
        visible.setflags(write=False)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'visible', visible)

    def __len__(self):
        return len(self.points)

    @property
    def num_visible(self) -> int:
        return int(np.count_nonzero(self.visible))

    @property
    def solvable(self) -> bool:
        return self.num_visible >= MIN_VISIBLE_POINTS

    def permuted(self, order: Sequence[int]) -> "KeypointFrame":
        """Frame whose point ``i`` is this frame's point ``order[i]``."""
        order = np.asarray(order, dtype=int)
        return KeypointFrame(self.frame, self.points[order], self.visible[order])


def read_keypoints_csv(path: Union[str, Path]) -> List[KeypointFrame]:
    """Read keypoint detections; every frame must list the same point ids 0..N-1."""
    path = Path(path)
    if not path.exists():
        raise DataError("Keypoint file not found", path=str(path))
    try:
        table = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Unreadable keypoint CSV: {e}", path=str(path))
    if list(table.columns) != KEYPOINT_COLUMNS:
        raise DataError(f"Keypoint header must be {','.join(KEYPOINT_COLUMNS)}", path=str(path), line=1)
    if table.empty:
        raise DataError("Keypoint file has no rows", path=str(path))

    frames = []
    expected_ids = None
    for frame_index, group in table.sort_values(['frame', 'point_id']).groupby('frame', sort=True):
        ids = group['point_id'].astype(int).tolist()
        if expected_ids is None:
            expected_ids = list(range(len(ids)))
        if ids != expected_ids:
            # header is line 1, data rows start at line 2
            line = int(group.index[0]) + 2
            raise DataError(f"Frame {frame_index} lists point ids {ids}, expected {expected_ids}",
                            path=str(path), line=line)
        frames.append(KeypointFrame(
            frame=int(frame_index),
            points=group[['u', 'v']].to_numpy(dtype=float),
            visible=group['visible'].astype(int).to_numpy() != 0,
        ))
    return frames


def write_keypoints_csv(frames: Sequence[KeypointFrame], path: Union[str, Path]) -> Path:
    rows = [
        (frame.frame, point_id, point[0], point[1], int(visible))
        for frame in frames
        for point_id, (point, visible) in enumerate(zip(frame.points, frame.visible))
    ]
    table = pd.DataFrame(rows, columns=KEYPOINT_COLUMNS)
    return atomic_write_text(path, table.to_csv(index=False, float_format='%.17g', lineterminator='\n'))


def read_intrinsics(path: Union[str, Path]) -> CameraIntrinsics:
    try:
        return CameraIntrinsics.from_dict(read_json(path))
    except (ValidationError, TypeError, ValueError) as e:
        raise DataError(f"Invalid intrinsics: {e}", path=str(path))


def write_intrinsics(intrinsics: CameraIntrinsics, path: Union[str, Path]) -> Path:
    return write_json(path, intrinsics.to_dict())


def read_model_points(path: Union[str, Path]) -> np.ndarray:
    """Object-frame model points, either a bare array or ``{"points": [...]}``."""
    data = read_json(path)
    if isinstance(data, dict):
        data = data.get('points')
    try:
        points = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise DataError("Model points must be numeric", path=str(path))
    if points.ndim != 2 or points.shape[1] != 3 or len(points) < MIN_VISIBLE_POINTS:
        raise DataError(f"Model points must have shape (N >= {MIN_VISIBLE_POINTS}, 3), got {points.shape}",
                        path=str(path))
    return points


def write_model_points(points, path: Union[str, Path]) -> Path:
    return write_json(path, {'points': np.asarray(points, dtype=float).tolist()})
