"""
Reference predictors for density estimation

All baselines return density slots; none of them sees the test object's
trajectories except ``baseline_nearest``, which retrieves by them.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.materials import NUM_DENSITY_SLOTS, Material, material_slots, validate_slot
from ..core.poses import NUM_INTERACTIONS, Trajectory
from ..inference.distance import interaction_distances
from ..utils.error_handling import DomainError


@dataclass(frozen=True)
class TrainingExample:
    """Density assignment of a training object and its interaction responses."""

    slots: Tuple[int, ...]
    trajectories: Tuple[Trajectory, ...]

    @property
    def num_primitives(self) -> int:
        return len(self.slots)


def _flatten_slots(train) -> List[int]:
    slots = []
    for entry in train:
        if isinstance(entry, TrainingExample):
            slots.extend(entry.slots)
        elif isinstance(entry, (list, tuple, np.ndarray)):
            slots.extend(int(s) for s in entry)
        else:
            slots.append(entry)
    return [validate_slot(s) for s in slots]


def baseline_frequent(train: Iterable[Union[int, Sequence[int], TrainingExample]]) -> int:
    """
    Most frequent slot among all training primitives; ties go to the smallest slot.

    Raises:
        DomainError: empty training set
    """
    slots = _flatten_slots(train)
    if not slots:
        raise DomainError("baseline_frequent needs a non-empty training set")
    counts = np.bincount(slots, minlength=NUM_DENSITY_SLOTS + 1)
    return int(np.argmax(counts))


def _check_protocol(example: TrainingExample, observations: Sequence[Trajectory], index: int):
    if len(example.trajectories) != len(observations):
        raise DomainError(f"training item {index} has {len(example.trajectories)} trajectories, "
                          f"query has {len(observations)}")
    for k, (train_traj, observed) in enumerate(zip(example.trajectories, observations)):
        if len(train_traj) != len(observed) or train_traj.dt != observed.dt:
            raise DomainError(
                f"training item {index} interaction {k} was recorded with {len(train_traj)} poses at "
                f"dt={train_traj.dt:.6g}, query with {len(observed)} poses at dt={observed.dt:.6g}"
            )
        if None not in (train_traj.interaction_id, observed.interaction_id) \
                and train_traj.interaction_id != observed.interaction_id:
            raise DomainError(f"training item {index} pairs interaction {train_traj.interaction_id} "
                              f"with query interaction {observed.interaction_id}")


def baseline_nearest(train: Sequence[TrainingExample], observations: Sequence[Trajectory],
                     mode: str = 'mse', num_primitives: Optional[int] = None) -> Tuple[Tuple[int, ...], float]:
    """
    Retrieve the training assignment whose trajectories are closest to the query.

    The distance is summed over the interactions; the first of equally close
    items wins.

    Args:
        train: Training objects with their trajectories
        observations: Query trajectories, one per interaction
        mode: Trajectory distance ('mse' or 'mae')
        num_primitives: Only consider training objects with this many primitives

    Returns:
        Tuple of (retrieved slots, summed distance)

    Raises:
        DomainError: empty (filtered) training set or a protocol mismatch
    """
    observations = list(observations)
    if len(observations) != NUM_INTERACTIONS:
        raise DomainError(f"expected {NUM_INTERACTIONS} query trajectories, got {len(observations)}")
    pool = [(index, example) for index, example in enumerate(train)
            if num_primitives is None or example.num_primitives == num_primitives]
    if not pool:
        raise DomainError("baseline_nearest needs a non-empty training set")

    best_slots, best_distance = None, float('inf')
    for index, example in pool:
        _check_protocol(example, observations, index)
        distance = float(np.sum(interaction_distances(example.trajectories, observations, mode)))
        if best_slots is None or distance < best_distance:
            best_slots, best_distance = example.slots, distance
    return tuple(best_slots), best_distance


def baseline_oracle(material: Union[str, Material], seed=0) -> int:
    """Uniform guess within the true material's slot range."""
    choices = sorted(material_slots(material))
    rng = np.random.default_rng(seed)
    return int(choices[rng.integers(len(choices))])


def random_guess(num_primitives: int, seed=0) -> Tuple[int, ...]:
    """Uniform slots over 1..100, the chance-level anchor."""
    rng = np.random.default_rng(seed)
    return tuple(int(s) for s in rng.integers(1, NUM_DENSITY_SLOTS + 1, size=num_primitives))
