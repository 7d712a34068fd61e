"""
Rigid-body simulation of composite cuboid objects

The object moves as a single rigid body. Each step applies gravity, the
interaction impulse (first step only), resolves ground contacts with a
sequential-impulse solver over the corners of every primitive, and then
integrates position and orientation with semi-implicit Euler.

The angular state is the world-frame angular momentum ``L``; angular
velocity is derived as ``I_world^-1 L`` so torque-free motion conserves
``L`` exactly.

Many density assignments of one geometry are simulated together as the
rows of a ``RigidBodyBatch``. Rows never interact and all arithmetic is
elementwise, so a batched rollout equals the single-object rollout bit
for bit.
"""

from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Union

import numpy as np

from .interactions import FORCE_MAGNITUDE, Interaction, as_interaction, push_impulses
from .mass import MassProperties, batch_mass_properties, mass_properties
from ..core.poses import NUM_INTERACTIONS, SIMULATION_DT, TRAJECTORY_LENGTH, Trajectory
from ..core.primitives import PrimitiveObject
from ..utils.error_handling import DomainError, SimulationError, ValidationError
from ..utils.rotations import quat_to_matrix

GROUND_TOLERANCE = 1e-6


def _matmul3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise products of (3, 3, B) matrix stacks."""
    return a[:, 0, np.newaxis] * b[np.newaxis, 0] + a[:, 1, np.newaxis] * b[np.newaxis, 1] \
        + a[:, 2, np.newaxis] * b[np.newaxis, 2]


def _matvec3(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    return m[:, 0] * v[0] + m[:, 1] * v[1] + m[:, 2] * v[2]


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def _inverse3(m: np.ndarray) -> np.ndarray:
    """Adjugate inverse of (3, 3, B) matrix stacks."""
    cofactors = np.stack([
        np.stack([m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1],
                  m[1, 2] * m[2, 0] - m[1, 0] * m[2, 2],
                  m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]]),
        np.stack([m[0, 2] * m[2, 1] - m[0, 1] * m[2, 2],
                  m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0],
                  m[0, 1] * m[2, 0] - m[0, 0] * m[2, 1]]),
        np.stack([m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1],
                  m[0, 2] * m[1, 0] - m[0, 0] * m[1, 2],
                  m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]]),
    ])
    determinant = m[0, 0] * cofactors[0, 0] + m[0, 1] * cofactors[0, 1] + m[0, 2] * cofactors[0, 2]
    return cofactors.transpose(1, 0, 2) / determinant


def _integrate_quaternions(q: np.ndarray, omega: np.ndarray, dt: float) -> np.ndarray:
    """First-order update ``q + dt/2 * (0, omega) * q`` of (4, B) quaternions, renormalized."""
    wx, wy, wz = omega
    qw, qx, qy, qz = q
    spin = np.stack([
        -wx * qx - wy * qy - wz * qz,
        wx * qw + wy * qz - wz * qy,
        -wx * qz + wy * qw + wz * qx,
        wx * qy - wy * qx + wz * qw,
    ])
    q_new = q + 0.5 * dt * spin
    norm = np.sqrt(q_new[0] * q_new[0] + q_new[1] * q_new[1] + q_new[2] * q_new[2] + q_new[3] * q_new[3])
    return q_new / norm


@dataclass(frozen=True)
class SimConfig:
    """Simulator constants. ``dt`` and ``steps`` default to 1/300 s and 256."""

    dt: float = SIMULATION_DT
    steps: int = TRAJECTORY_LENGTH
    gravity: float = 9.8
    ground_z: float = -0.5
    ground_enabled: bool = True
    friction: float = 0.5
    restitution: float = 0.0
    baumgarte: float = 0.2
    iterations: int = 10
    warm_start: bool = True
    contact_margin: float = 2e-3
    penetration_slop: float = 5e-4
    max_speed: float = 1e3

    def __post_init__(self):
        violations = []
        if not self.dt > 0:
            violations.append(f"dt must be positive, got {self.dt}")
        if not isinstance(self.steps, int) or self.steps < 1:
            violations.append(f"steps must be a positive integer, got {self.steps!r}")
        if self.gravity < 0:
            violations.append("gravity is a magnitude along -z and must be >= 0")
        if self.friction < 0:
            violations.append("friction must be >= 0")
        if not 0.0 <= self.restitution <= 1.0:
            violations.append("restitution must lie in [0, 1]")
        if not 0.0 <= self.baumgarte <= 1.0:
            violations.append("baumgarte must lie in [0, 1]")
        if not isinstance(self.iterations, int) or self.iterations < 1:
            violations.append("iterations must be a positive integer")
        if self.contact_margin < 0 or self.penetration_slop < 0:
            violations.append("contact_margin and penetration_slop must be >= 0")
        if not self.max_speed > 0:
            violations.append("max_speed must be positive")
        if violations:
            raise ValidationError("Invalid simulator configuration", violations)

    @property
    def is_standard(self) -> bool:
        return self.dt == SIMULATION_DT and self.steps == TRAJECTORY_LENGTH

    @classmethod
    def free_flight(cls, **overrides) -> "SimConfig":
        """No gravity and no ground."""
        return cls(**{'gravity': 0.0, 'ground_enabled': False, **overrides})

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict]) -> "SimConfig":
        data = dict(data or {})
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ValidationError("Invalid simulator configuration", [f"unknown settings {sorted(unknown)}"])
        return cls(**data)



class RigidBodyBatch:
    """
    Mutable simulation state of one geometry under many mass distributions.

    Row ``b`` is the object with density slots ``slot_vectors[b]``. The
    object frame coincides with the world frame at the start, so every row
    rests where the primitives are placed. State is stored component-first,
    e.g. positions as (3, B); every update is elementwise per row, so a row
    evolves identically whatever else shares the batch.
    """

    _ROW_ARRAYS = ('mass', '_body_corners', '_origin_offset', '_inverse_inertia', '_reach',
                   '_position', '_orientation', '_velocity', '_angular_momentum', '_rotation', '_warm')

    def __init__(self, geometry: PrimitiveObject, slot_vectors, config: Optional[SimConfig] = None):
        self.config = config or SimConfig()
        mass, com, inertia = batch_mass_properties(geometry, slot_vectors)
        corners = geometry.corners()
        if self.config.ground_enabled and corners[:, 2].min() < self.config.ground_z - GROUND_TOLERANCE:
            raise DomainError(
                f"Object starts {self.config.ground_z - corners[:, 2].min():.3g} m below the ground plane"
            )
        rows = len(mass)
        self.mass = mass
        self.center_of_mass = com
        self._body_corners = corners[:, :, np.newaxis] - com.T[np.newaxis]
        self._origin_offset = -com.T
        self._inverse_inertia = _inverse3(inertia.transpose(1, 2, 0))
        offsets = self._body_corners
        self._reach = np.sqrt(offsets[:, 0] ** 2 + offsets[:, 1] ** 2 + offsets[:, 2] ** 2).max(axis=0)

        self._position = com.T.copy()
        self._orientation = np.zeros((4, rows))
        self._orientation[0] = 1.0
        self._velocity = np.zeros((3, rows))
        self._angular_momentum = np.zeros((3, rows))
        self._rotation = np.zeros((3, 3, rows))
        for axis in range(3):
            self._rotation[axis, axis] = 1.0
        self._warm = np.zeros_like(self._body_corners)
        self.step_count = 0

    def __len__(self) -> int:
        return len(self.mass)

    def take(self, rows) -> "RigidBodyBatch":
        """A new batch holding copies of the given rows."""
        rows = np.asarray(rows)
        subset = object.__new__(type(self))
        subset.config = self.config
        subset.step_count = self.step_count
        subset.center_of_mass = self.center_of_mass[rows]
        for name in self._ROW_ARRAYS:
            setattr(subset, name, getattr(self, name)[..., rows].copy())
        return subset

    @property
    def position(self) -> np.ndarray:
        """World centres of mass, (B, 3)."""
        return self._position.T

    @property
    def velocity(self) -> np.ndarray:
        return self._velocity.T

    @property
    def orientation(self) -> np.ndarray:
        return self._orientation.T

    @property
    def angular_momentum(self) -> np.ndarray:
        return self._angular_momentum.T

    def _world_inverse_inertia(self) -> np.ndarray:
        """World inverse inertia tensors, (3, 3, B)."""
        return _matmul3(_matmul3(self._rotation, self._inverse_inertia), self._rotation.transpose(1, 0, 2))

    def apply_impulses(self, impulses, points=None):
        """Apply impulses (B, 3) at world points (B, 3); at the COMs when ``points`` is None."""
        impulses = np.asarray(impulses, dtype=float).reshape(-1, 3).T
        self._velocity = self._velocity + impulses / self.mass
        if points is not None:
            arms = np.asarray(points, dtype=float).reshape(-1, 3).T - self._position
            self._angular_momentum = self._angular_momentum + _cross(arms, impulses)

    def poses(self) -> np.ndarray:
        """World poses (B, 7) of the object-frame origin, quaternions with q_w >= 0."""
        position = self._position + _matvec3(self._rotation, self._origin_offset)
        orientation = np.where(self._orientation[0] >= 0.0, self._orientation, -self._orientation)
        return np.ascontiguousarray(np.concatenate([position, orientation]).T)

    def step(self, impulses=None, points=None) -> np.ndarray:
        """
        Advance every row by one step.

        Returns:
            Boolean mask (B,) of rows whose state became non-finite or whose
            speed exceeds ``config.max_speed``
        """
        config = self.config
        dt = config.dt
        with np.errstate(over='ignore', invalid='ignore'):
            if config.gravity:
                self._velocity[2] = self._velocity[2] - config.gravity * dt
            if impulses is not None:
                self.apply_impulses(impulses, points)
            inverse_inertia = self._world_inverse_inertia()
            if config.ground_enabled:
                self._solve_contacts(inverse_inertia, dt)

            omega = _matvec3(inverse_inertia, self._angular_momentum)
            self._position = self._position + self._velocity * dt
            self._orientation = _integrate_quaternions(self._orientation, omega, dt)
            self._rotation = quat_to_matrix(self._orientation)
            self.step_count += 1

            finite = (np.isfinite(self._position).all(axis=0) & np.isfinite(self._velocity).all(axis=0)
                      & np.isfinite(self._orientation).all(axis=0)
                      & np.isfinite(self._angular_momentum).all(axis=0))
            vx, vy, vz = self._velocity
            speed = np.sqrt(vx * vx + vy * vy + vz * vz)
            return ~finite | (speed > config.max_speed)

    def _solve_contacts(self, inverse_inertia: np.ndarray, dt: float):
        config = self.config
        corners = self._body_corners
        rz = self._rotation[2]
        separation = self._position[2] + (rz[0] * corners[:, 0] + rz[1] * corners[:, 1]
                                          + rz[2] * corners[:, 2]) - config.ground_z
        omega = _matvec3(inverse_inertia, self._angular_momentum)
        omega_norm = np.sqrt(omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2])
        bound = (np.abs(self._velocity[2]) + omega_norm * self._reach) * dt
        previous_warm = self._warm
        self._warm = np.zeros_like(previous_warm)

        # only rows with some corner possibly inside the contact margin
        rows = np.flatnonzero(separation.min(axis=0) - bound < config.contact_margin + 1e-9)
        if rows.size == 0:
            return
        rotation = self._rotation[..., rows]
        local = corners[..., rows]
        arms = (rotation[np.newaxis, :, 0] * local[:, np.newaxis, 0]
                + rotation[np.newaxis, :, 1] * local[:, np.newaxis, 1]
                + rotation[np.newaxis, :, 2] * local[:, np.newaxis, 2])
        gap = separation[:, rows]
        velocity = self._velocity[:, rows].copy()
        spin = omega[:, rows].copy()
        approach = velocity[2] + (spin[0] * arms[:, 1] - spin[1] * arms[:, 0])
        active = gap + np.minimum(approach * dt, 0.0) < config.contact_margin
        corner_ids = np.flatnonzero(active.any(axis=1))
        if corner_ids.size == 0:
            return

        world_inverse = inverse_inertia[..., rows]
        inverse_mass = 1.0 / self.mass[rows]
        contacts = []
        for c in corner_ids:
            ax, ay, az = arms[c]
            # angular Jacobians of the normal, then the x and y friction tangents
            angular = ((ay, -ax, 0.0), (0.0, az, -ay), (-az, 0.0, ax))
            responses = [world_inverse[:, 0] * a0 + world_inverse[:, 1] * a1 + world_inverse[:, 2] * a2
                         for a0, a1, a2 in angular]
            effective = [inverse_mass + (a0 * r[0] + a1 * r[1] + a2 * r[2])
                         for (a0, a1, a2), r in zip(angular, responses)]
            # an inactive corner never takes a normal impulse, so its friction bound stays zero
            effective[0] = np.where(active[c], effective[0], np.inf)
            target = np.where(
                gap[c] < 0.0,
                config.baumgarte / dt * np.maximum(-gap[c] - config.penetration_slop, 0.0),
                -gap[c] / dt,
            )
            if config.restitution:
                normal_speed = velocity[2] + (ay * spin[0] - ax * spin[1])
                target = np.maximum(target, np.where(normal_speed < 0.0, -config.restitution * normal_speed, 0.0))
            if config.warm_start:
                impulses = np.where(active[c], previous_warm[c][:, rows], 0.0)
            else:
                impulses = np.zeros((3, len(rows)))
            contacts.append((c, arms[c], responses, effective, target, impulses))

        if config.warm_start:
            for _, _, responses, _, _, impulses in contacts:
                for axis, response, impulse in zip((2, 0, 1), responses, impulses):
                    velocity[axis] = velocity[axis] + impulse * inverse_mass
                    spin = spin + impulse * response

        for _ in range(config.iterations):
            for c, (ax, ay, az), responses, effective, target, impulses in contacts:
                relative = velocity[2] + (ay * spin[0] - ax * spin[1])
                accumulated = np.maximum(impulses[0] + (target - relative) / effective[0], 0.0)
                delta = accumulated - impulses[0]
                impulses[0] = accumulated
                velocity[2] = velocity[2] + delta * inverse_mass
                spin = spin + delta * responses[0]

                limit = config.friction * impulses[0]
                relative = velocity[0] + (az * spin[1] - ay * spin[2])
                accumulated = np.minimum(np.maximum(impulses[1] - relative / effective[1], -limit), limit)
                delta = accumulated - impulses[1]
                impulses[1] = accumulated
                velocity[0] = velocity[0] + delta * inverse_mass
                spin = spin + delta * responses[1]

                relative = velocity[1] + (ax * spin[2] - az * spin[0])
                accumulated = np.minimum(np.maximum(impulses[2] - relative / effective[2], -limit), limit)
                delta = accumulated - impulses[2]
                impulses[2] = accumulated
                velocity[1] = velocity[1] + delta * inverse_mass
                spin = spin + delta * responses[2]

        momentum = self._angular_momentum[:, rows]
        for c, (ax, ay, az), _, _, _, (normal, along_x, along_y) in contacts:
            momentum = momentum + np.stack([ay * normal - az * along_y,
                                            az * along_x - ax * normal,
                                            ax * along_y - ay * along_x])
            if config.warm_start:
                self._warm[c][:, rows] = np.stack([normal, along_x, along_y])
        self._velocity[:, rows] = velocity
        self._angular_momentum[:, rows] = momentum


class RigidBodySimulation(RigidBodyBatch):
    """
    Mutable simulation state of one composite object.

    A single-row batch with vector-valued accessors. ``step`` raises
    SimulationError when the state diverges.
    """

    def __init__(self, obj: PrimitiveObject, config: Optional[SimConfig] = None):
        if not obj.has_densities:
            raise DomainError("Simulation needs a density slot on every primitive")
        super().__init__(obj, [obj.slots], config)
        self.mass_properties: MassProperties = mass_properties(obj)

    @property
    def position(self) -> np.ndarray:
        return self._position[:, 0]

    @property
    def velocity(self) -> np.ndarray:
        return self._velocity[:, 0]

    @property
    def orientation(self) -> np.ndarray:
        return self._orientation[:, 0]

    @property
    def angular_momentum(self) -> np.ndarray:
        return self._angular_momentum[:, 0]

    @property
    def linear_momentum(self) -> np.ndarray:
        return self.mass[0] * self.velocity

    @property
    def rotation_matrix(self) -> np.ndarray:
        return self._rotation[..., 0]

    @property
    def inverse_inertia_world(self) -> np.ndarray:
        return self._world_inverse_inertia()[..., 0]

    @property
    def angular_velocity(self) -> np.ndarray:
        return self.inverse_inertia_world @ self.angular_momentum

    def apply_impulse(self, impulse, point=None):
        """Apply an impulse (N s) at a world point; at the COM when ``point`` is None."""
        self.apply_impulses(impulse, point)

    def pose(self) -> np.ndarray:
        """World pose of the object-frame origin, quaternion with q_w >= 0."""
        return self.poses()[0]

    def step(self, impulse=None, point=None):
        if super().step(impulse, point)[0]:
            raise SimulationError(_divergence_reason(self, 0), self.step_count - 1)


def _divergence_reason(batch: RigidBodyBatch, row: int) -> str:
    state = np.concatenate([batch._position[:, row], batch._velocity[:, row],
                            batch._orientation[:, row], batch._angular_momentum[:, row]])
    if not np.all(np.isfinite(state)):
        return "Non-finite state"
    speed = float(np.linalg.norm(batch._velocity[:, row]))
    return f"Diverged with speed {speed:.4g} m/s"


def simulate(obj: PrimitiveObject, interaction: Union[int, Interaction, None],
             config: Optional[SimConfig] = None) -> Trajectory:
    """
    Roll out one interaction.

    Args:
        obj: Object with density slots, resting on (or above) the ground
        interaction: Interaction or its index 0..3; None for no push
        config: Simulator constants (defaults if None)

    Returns:
        Trajectory of ``config.steps`` poses; pose ``k`` follows step ``k + 1``

    Raises:
        SimulationError: non-finite state or speed above ``config.max_speed``
    """
    config = config or SimConfig()
    interaction = as_interaction(interaction)
    simulation = RigidBodySimulation(obj, config)

    impulse = point = None
    if interaction is not None:
        impulse, point = push_impulses(obj, simulation.center_of_mass, [interaction.index],
                                       interaction.force_magnitude, config.dt)

    poses = np.empty((config.steps, 7))
    for k in range(config.steps):
        if k == 0:
            simulation.step(impulse, point)
        else:
            simulation.step()
        poses[k] = simulation.pose()

    return Trajectory(poses, dt=config.dt,
                      interaction_id=None if interaction is None else interaction.index)


def simulate_all(obj: PrimitiveObject, config: Optional[SimConfig] = None,
                 force_magnitude: float = FORCE_MAGNITUDE) -> List[Trajectory]:
    """Roll out the four canonical interactions in index order, as one batch."""
    config = config or SimConfig()
    if not obj.has_densities:
        raise DomainError("Simulation needs a density slot on every primitive")
    batch = RigidBodyBatch(obj, [obj.slots] * NUM_INTERACTIONS, config)
    impulses, points = push_impulses(obj, batch.center_of_mass, range(NUM_INTERACTIONS),
                                     force_magnitude, config.dt)

    poses = np.empty((NUM_INTERACTIONS, config.steps, 7))
    for k in range(config.steps):
        diverged = batch.step(impulses, points) if k == 0 else batch.step()
        if diverged.any():
            row = int(np.flatnonzero(diverged)[0])
            raise SimulationError(f"Interaction {row}: {_divergence_reason(batch, row)}", k)
        poses[:, k] = batch.poses()
    return [Trajectory(poses[i], dt=config.dt, interaction_id=i) for i in range(NUM_INTERACTIONS)]
