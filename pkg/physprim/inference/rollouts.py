"""
Batched scoring of density candidates that share one geometry

Every candidate contributes four rows to a ``RigidBodyBatch``, one per
interaction. Trajectory errors are accumulated frame by frame while the
batch steps, so no trajectories are stored and a partially simulated
candidate already has a lower bound on its final score. Exhaustive search
uses that bound to stop simulating candidates that cannot reach the top of
the ranking.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.poses import NUM_INTERACTIONS, Trajectory
from ..core.primitives import PrimitiveObject
from ..physics.interactions import FORCE_MAGNITUDE, push_impulses
from ..physics.simulator import RigidBodyBatch, SimConfig
from ..utils.error_handling import DomainError

POSE_COMPONENTS = 7


@dataclass(frozen=True)
class Candidate:
    """One evaluated density assignment (and, for shape sampling, its shape)."""

    slots: Tuple[int, ...]
    score: float
    distances: Tuple[float, ...]
    draw_index: int = 0
    shape: Optional[PrimitiveObject] = None
    mae: float = float('inf')
    trajectories: Optional[Tuple[Trajectory, ...]] = field(default=None, compare=False, repr=False)

    @property
    def sort_key(self):
        return (self.score, self.slots, self.draw_index)

    @property
    def diverged(self) -> bool:
        return not np.isfinite(self.score)

    def to_dict(self) -> Dict:
        data = {
            'slots': list(self.slots),
            'score': self.score if np.isfinite(self.score) else None,
            'distances': [d if np.isfinite(d) else None for d in self.distances],
            'draw_index': self.draw_index,
            'mae': self.mae if np.isfinite(self.mae) else None,
        }
        if self.shape is not None:
            data['shape'] = self.shape.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "Candidate":
        def _score(value):
            return float('inf') if value is None else float(value)

        shape = data.get('shape')
        return cls(
            slots=tuple(int(s) for s in data['slots']),
            score=_score(data.get('score')),
            distances=tuple(_score(d) for d in data.get('distances', ())),
            draw_index=int(data.get('draw_index', 0)),
            shape=PrimitiveObject.from_dict(shape) if shape else None,
            mae=_score(data.get('mae')),
        )


class CandidateRollouts:
    """
    Simulation and running trajectory errors of many slot vectors.

    Args:
        geometry: Shape shared by all candidates
        observations: The four observed trajectories, in interaction order
        slot_vectors: (B, K) density slots
        draw_indices: (B,) draw index of each candidate
        sim_config: Simulator constants; ``steps`` must match the observations
        force_magnitude: Push force in N
        distance: 'mse' or 'mae', the error the score is built from
        record: Keep the simulated poses so trajectories can be returned
    """

    def __init__(self, geometry: PrimitiveObject, observations: Sequence[Trajectory], slot_vectors,
                 draw_indices=None, sim_config: Optional[SimConfig] = None,
                 force_magnitude: float = FORCE_MAGNITUDE, distance: str = 'mse', record: bool = False):
        self.geometry = geometry
        self.sim_config = sim_config or SimConfig()
        self.distance = distance
        self.record = record
        self.slots = np.asarray(slot_vectors, dtype=int).reshape(-1, len(geometry))
        count = len(self.slots)
        self.draw_indices = (np.arange(count) if draw_indices is None
                             else np.asarray(draw_indices, dtype=int).reshape(count))
        self._observed = np.stack([observation.poses for observation in observations])
        if self._observed.shape[:2] != (NUM_INTERACTIONS, self.sim_config.steps):
            raise DomainError(f"Expected {NUM_INTERACTIONS} observations of {self.sim_config.steps} poses, "
                              f"got shape {self._observed.shape[:2]}")

        self.step = 0
        self.squared = np.zeros((count, NUM_INTERACTIONS))
        self.absolute = np.zeros((count, NUM_INTERACTIONS))
        self.poses = [] if record else None
        self.diverged: List[tuple] = []
        self._batch = None
        self._impulses = self._points = None
        if count:
            self._batch = RigidBodyBatch(geometry, np.repeat(self.slots, NUM_INTERACTIONS, axis=0), self.sim_config)
            self._impulses, self._points = push_impulses(
                geometry, self._batch.center_of_mass, np.tile(np.arange(NUM_INTERACTIONS), count),
                force_magnitude, self.sim_config.dt,
            )

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def frames(self) -> int:
        return self.sim_config.steps

    @property
    def finished(self) -> bool:
        return self.step == self.frames

    def _normalized(self, sums: np.ndarray) -> np.ndarray:
        return sums / (self.frames * POSE_COMPONENTS)

    def _mean_over_interactions(self, values: np.ndarray) -> np.ndarray:
        total = values[:, 0]
        for i in range(1, NUM_INTERACTIONS):
            total = total + values[:, i]
        return total / NUM_INTERACTIONS

    def lower_bounds(self) -> np.ndarray:
        """
        Scores of the frames simulated so far, normalized as the full score.

        Errors only accumulate, so a candidate's final score is never below
        its current bound; once finished the bound is the score.
        """
        sums = self.squared if self.distance == 'mse' else self.absolute
        return self._mean_over_interactions(self._normalized(sums))

    def advance(self, frame: int):
        """Simulate every candidate up to ``frame`` poses."""
        frame = min(int(frame), self.frames)
        while self.step < frame and len(self):
            first = self.step == 0
            diverged = self._batch.step(self._impulses, self._points) if first else self._batch.step()
            poses = self._batch.poses()
            if self.record:
                self.poses.append(poses)
            self._accumulate(poses)
            self.step += 1
            rows = diverged.reshape(-1, NUM_INTERACTIONS).any(axis=1)
            if rows.any():
                self.diverged.extend((tuple(int(s) for s in self.slots[i]), int(self.draw_indices[i]))
                                     for i in np.flatnonzero(rows))
                self._keep(~rows)
        self.step = max(self.step, frame)

    @np.errstate(invalid='ignore', over='ignore')
    def _accumulate(self, poses: np.ndarray):
        observed = np.tile(self._observed[:, self.step], (len(self), 1))
        dot = (poses[:, 3] * observed[:, 3] + poses[:, 4] * observed[:, 4]
               + poses[:, 5] * observed[:, 5] + poses[:, 6] * observed[:, 6])
        flip = dot < 0.0
        squared = np.zeros(len(poses))
        absolute = np.zeros(len(poses))
        for component in range(POSE_COMPONENTS):
            value = poses[:, component]
            if component >= 3:
                value = np.where(flip, -value, value)
            difference = value - observed[:, component]
            squared = squared + difference * difference
            absolute = absolute + np.abs(difference)
        self.squared = self.squared + squared.reshape(-1, NUM_INTERACTIONS)
        self.absolute = self.absolute + absolute.reshape(-1, NUM_INTERACTIONS)

    def _keep(self, mask: np.ndarray):
        rows = np.repeat(mask, NUM_INTERACTIONS)
        self.slots = self.slots[mask]
        self.draw_indices = self.draw_indices[mask]
        self.squared = self.squared[mask]
        self.absolute = self.absolute[mask]
        if self.record:
            self.poses = [poses[rows] for poses in self.poses]
        if self._impulses is not None:
            self._impulses, self._points = self._impulses[rows], self._points[rows]
        self._batch = self._batch.take(np.flatnonzero(rows)) if mask.any() else None

    def subset(self, mask) -> "CandidateRollouts":
        """A copy holding the candidates selected by ``mask``; diverged ones stay behind."""
        mask = np.asarray(mask, dtype=bool)
        subset = object.__new__(type(self))
        subset.__dict__.update(self.__dict__)
        subset.diverged = []
        if self.record:
            subset.poses = list(self.poses)
        subset._keep(mask)
        return subset

    def diverged_candidates(self, shape: Optional[PrimitiveObject] = None) -> List[Candidate]:
        infinite = tuple(float('inf') for _ in range(NUM_INTERACTIONS))
        return [Candidate(slots, float('inf'), infinite, draw_index, shape) for slots, draw_index in self.diverged]

    def candidates(self, shape: Optional[PrimitiveObject] = None) -> List[Candidate]:
        """Finished candidates, diverged ones with infinite scores."""
        if not self.finished:
            raise DomainError(f"Candidates are scored after {self.frames} frames, simulated {self.step}")
        distances = self._normalized(self.squared if self.distance == 'mse' else self.absolute)
        scores = self._mean_over_interactions(distances)
        maes = self._mean_over_interactions(self._normalized(self.absolute))
        trajectories = None
        if self.record:
            stacked = np.stack(self.poses, axis=1) if self.poses else np.empty((0, self.frames, POSE_COMPONENTS))
            trajectories = stacked.reshape(len(self), NUM_INTERACTIONS, self.frames, POSE_COMPONENTS)

        result = []
        for index in range(len(self)):
            result.append(Candidate(
                slots=tuple(int(s) for s in self.slots[index]),
                score=float(scores[index]),
                distances=tuple(float(d) for d in distances[index]),
                draw_index=int(self.draw_indices[index]),
                shape=shape,
                mae=float(maes[index]),
                trajectories=None if trajectories is None else tuple(
                    Trajectory(trajectories[index, i], dt=self.sim_config.dt, interaction_id=i)
                    for i in range(NUM_INTERACTIONS)
                ),
            ))
        return result + self.diverged_candidates(shape)
