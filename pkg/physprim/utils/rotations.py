"""
Quaternion helpers shared by the physics, geometry and tracking modules.

Quaternions are numpy arrays in (w, x, y, z) order and rotate body
coordinates into world coordinates.
"""

import numpy as np

IDENTITY_QUATERNION = np.array([1.0, 0.0, 0.0, 0.0])


def canonical_quaternion(q) -> np.ndarray:
    """Normalize ``q`` and flip its sign so that ``q_w >= 0``."""
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"Cannot normalize quaternion {q.tolist()}")
    q = q / norm
    if q[0] < 0.0:
        q = -q
    return q


def quat_multiply(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])


def quat_from_rotvec(rotvec) -> np.ndarray:
    rotvec = np.asarray(rotvec, dtype=float)
    angle = float(np.linalg.norm(rotvec))
    if angle < 1e-12:
        # second-order expansion keeps tiny LM steps exact to machine precision
        half = 0.5 * rotvec
        return canonical_quaternion(np.array([1.0 - angle * angle / 8.0, half[0], half[1], half[2]]))
    axis = rotvec / angle
    s = np.sin(0.5 * angle)
    return np.array([np.cos(0.5 * angle), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return quat_from_rotvec(axis * angle)


def quat_integrate(q, omega, dt: float) -> np.ndarray:
    """First-order quaternion update ``q + dt/2 * (0, omega) * q``, renormalized."""
    wx, wy, wz = omega
    spin = quat_multiply((0.0, wx, wy, wz), q)
    q_new = np.asarray(q, dtype=float) + 0.5 * dt * spin
    return q_new / np.linalg.norm(q_new)


def align_hemisphere(q, reference) -> np.ndarray:
    """Return ``q`` or ``-q``, whichever lies in the hemisphere of ``reference``."""
    q = np.asarray(q, dtype=float)
    if np.dot(q, reference) < 0.0:
        return -q
    return q


def rotation_angle_between(a, b) -> float:
    """Geodesic angle (radians) between the rotations of two unit quaternions."""
    dot = abs(float(np.dot(a, b)))
    return 2.0 * float(np.arccos(min(1.0, dot)))


def quat_slerp(a, b, fraction: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = align_hemisphere(b, a)
    dot = float(np.clip(np.dot(a, b), -1.0, 1.0))
    if dot > 0.9995:
        q = a + fraction * (b - a)
        return q / np.linalg.norm(q)
    theta = np.arccos(dot)
    sin_theta = np.sin(theta)
    q = (np.sin((1.0 - fraction) * theta) * a + np.sin(fraction * theta) * b) / sin_theta
    return q / np.linalg.norm(q)


def skew(v) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def quat_from_matrix(matrix) -> np.ndarray:
    """Unit quaternion (q_w >= 0) of a proper rotation matrix."""
    m = np.asarray(matrix, dtype=float)
    trace = float(np.trace(m))
    if trace > 0.0:
        s = 2.0 * np.sqrt(trace + 1.0)
        q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
    elif m[1, 1] > m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
    return canonical_quaternion(q)
