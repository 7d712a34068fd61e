"""
Sample-simulate-select density inference

Candidate density assignments are drawn from a per-primitive prior (or
enumerated on a grid), forward-simulated under the known interactions and
ranked by their trajectory distance to the observations. Rankings are
ordered by (score, slot vector), so they do not depend on the order in
which candidates finish evaluating.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .distance import DISTANCE_MODES
from .rollouts import Candidate, CandidateRollouts
from ..core.materials import NUM_DENSITY_SLOTS, validate_slot
from ..core.poses import NUM_INTERACTIONS, Trajectory
from ..core.primitives import Primitive, PrimitiveObject, canonical_order
from ..core.priors import DensityPrior
from ..physics.interactions import FORCE_MAGNITUDE
from ..physics.simulator import SimConfig
from ..shapefit.fitting import FitConfig, fit_primitives
from ..utils.batch_processing import parallel_map, process_in_batches
from ..utils.error_handling import DomainError, SearchSpaceError, ValidationError
from ..voxels.grid import VoxelGrid

STANDARD_BUDGETS = (1, 8, 64, 512)
EXHAUSTIVE = 'exhaustive'
MAX_SEARCH_CANDIDATES = 10 ** 6
INFERENCE_MODES = ('phys', 'shape+phys')
BATCH_CANDIDATES = 16384
PRUNING_FRAMES = (8, 32, 96)

Budget = Union[int, str]


def validate_budget(budget: Budget) -> Budget:
    if budget == EXHAUSTIVE:
        return budget
    if isinstance(budget, bool) or not isinstance(budget, (int, np.integer)) or budget < 1:
        raise DomainError(f"Budget must be a positive integer or '{EXHAUSTIVE}', got {budget!r}")
    return int(budget)


@dataclass(frozen=True)
class InferenceTask:
    """Known geometry plus the four observed trajectories of one object."""

    shape: PrimitiveObject
    observations: Tuple[Trajectory, ...]
    prior: Optional[DensityPrior] = None
    budget: Budget = 64
    distance: str = 'mse'
    sim_config: SimConfig = field(default_factory=SimConfig)
    force_magnitude: float = FORCE_MAGNITUDE

    def __post_init__(self):
        observations = tuple(self.observations)
        violations = []
        if len(observations) != NUM_INTERACTIONS:
            violations.append(f"expected {NUM_INTERACTIONS} observations, got {len(observations)}")
        for index, observation in enumerate(observations):
            if observation.interaction_id not in (None, index):
                violations.append(f"observation {index} comes from interaction {observation.interaction_id}")
            if len(observation) != self.sim_config.steps:
                violations.append(f"observation {index} has {len(observation)} poses, simulator produces {self.sim_config.steps}")
        if self.prior is not None and len(self.prior) != len(self.shape):
            violations.append(f"prior covers {len(self.prior)} primitives, shape has {len(self.shape)}")
        if self.distance not in DISTANCE_MODES:
            violations.append(f"distance must be one of {DISTANCE_MODES}")
        try:
            validate_budget(self.budget)
        except DomainError as e:
            violations.append(str(e))
        if violations:
            raise ValidationError("Invalid inference task", violations)
        object.__setattr__(self, 'observations', observations)
        object.__setattr__(self, 'shape', self.shape.geometry_only())

    @property
    def num_primitives(self) -> int:
        return len(self.shape)

    @property
    def density_prior(self) -> DensityPrior:
        return self.prior if self.prior is not None else DensityPrior.uniform(self.num_primitives)


def rank_candidates(candidates: Sequence[Candidate]) -> List[Candidate]:
    return sorted(candidates, key=lambda c: c.sort_key)


def _rollouts(task: InferenceTask, slot_vectors, shape: Optional[PrimitiveObject] = None,
              draw_indices=None, record: bool = False) -> CandidateRollouts:
    geometry = task.shape if shape is None else shape
    return CandidateRollouts(geometry, task.observations, slot_vectors, draw_indices=draw_indices,
                             sim_config=task.sim_config, force_magnitude=task.force_magnitude,
                             distance=task.distance, record=record)


def evaluate_candidate(task: InferenceTask, slots: Sequence[int],
                       shape: Optional[PrimitiveObject] = None, draw_index: int = 0,
                       keep_trajectories: bool = False) -> Candidate:
    """
    Simulate one assignment under all interactions and score it.

    A diverging rollout gives an infinite score instead of an error. The
    mean absolute error is kept alongside the selection score for reports.
    """
    slots = tuple(validate_slot(s) for s in slots)
    rollouts = _rollouts(task, [slots], shape, [draw_index], record=keep_trajectories)
    rollouts.advance(rollouts.frames)
    return rollouts.candidates(shape)[0]


def evaluate_candidates(task: InferenceTask, slot_vectors: Sequence[Sequence[int]],
                        shapes: Optional[Sequence[Optional[PrimitiveObject]]] = None,
                        draw_indices: Optional[Sequence[int]] = None,
                        max_workers: Optional[int] = None,
                        keep_trajectories: bool = False) -> List[Candidate]:
    """
    Evaluate candidates and return them ranked.

    Candidates sharing a shape are simulated together in batches of up to
    ``BATCH_CANDIDATES``; batches run concurrently with ``max_workers``.
    """
    vectors = [tuple(validate_slot(s) for s in v) for v in slot_vectors]
    shapes = list(shapes) if shapes is not None else [None] * len(vectors)
    draw_indices = list(draw_indices) if draw_indices is not None else list(range(len(vectors)))
    groups: Dict[Optional[PrimitiveObject], List[int]] = {}
    for index, shape in enumerate(shapes):
        groups.setdefault(shape, []).append(index)
    jobs = [(shape, chunk) for shape, indices in groups.items()
            for chunk in process_in_batches(indices, BATCH_CANDIDATES)]

    def run(job):
        shape, indices = job
        rollouts = _rollouts(task, [vectors[i] for i in indices], shape, [draw_indices[i] for i in indices],
                             record=keep_trajectories)
        rollouts.advance(rollouts.frames)
        return rollouts.candidates(shape)

    batches = parallel_map(run, jobs, max_workers=max_workers, desc="Evaluating candidates")
    return rank_candidates([candidate for batch in batches for candidate in batch])


def search_top(task: InferenceTask, slot_vectors: Sequence[Sequence[int]], keep: int,
               draw_offset: int = 0, verbose: bool = False) -> List[Candidate]:
    """
    The exact best ``keep`` candidates, simulating as little as possible.

    Each batch is simulated for a few frames; its ``keep`` most promising
    candidates are then finished to fix a score threshold, and the rest
    keep running only while their partial score (a lower bound on the
    final one) stays at or below it. The result equals the first ``keep``
    entries of the full ranking.
    """
    if isinstance(keep, bool) or not isinstance(keep, (int, np.integer)) or keep < 1:
        raise DomainError(f"keep must be a positive integer, got {keep!r}")
    frames = task.sim_config.steps
    checkpoints = [f for f in PRUNING_FRAMES if f < frames] + [frames]
    vectors = [tuple(validate_slot(s) for s in v) for v in slot_vectors]
    best: List[Candidate] = []
    finished = 0
    for start in range(0, len(vectors), BATCH_CANDIDATES):
        chunk = vectors[start:start + BATCH_CANDIDATES]
        rollouts = _rollouts(task, chunk, draw_indices=range(draw_offset + start, draw_offset + start + len(chunk)))
        rollouts.advance(checkpoints[0])
        leading = np.zeros(len(rollouts), dtype=bool)
        leading[np.argsort(rollouts.lower_bounds(), kind='stable')[:keep]] = True
        leaders, rest = rollouts.subset(leading), rollouts.subset(~leading)
        leaders.advance(frames)
        best = rank_candidates(best + rollouts.diverged_candidates() + leaders.candidates())[:keep]
        finished += len(leaders)

        threshold = best[-1].score if len(best) == keep else float('inf')
        diverged = []
        for checkpoint in checkpoints[1:]:
            diverged += rest.diverged_candidates()
            rest = rest.subset(rest.lower_bounds() <= threshold)
            rest.advance(checkpoint)
        best = rank_candidates(best + diverged + rest.candidates())[:keep]
        finished += len(rest)
    if verbose:
        print(f"📊 Simulated {finished} of {len(vectors)} candidates to the last frame")
    return best


def substream(seed, tag: int) -> List[int]:
    """Seed of an independent stream: ``[seed, tag]`` with list seeds flattened."""
    return [int(s) for s in np.atleast_1d(seed)] + [int(tag)]


def draw_slot_vectors(prior: DensityPrior, budget: int, seed) -> np.ndarray:
    """
    Candidate-major draws from the prior, shape (budget, K).

    The first n rows for a given seed do not depend on ``budget``.
    """
    rng = np.random.default_rng(seed)
    return prior.sample(rng.random((budget, len(prior))))


def _unique_draws(keys) -> List[int]:
    """First-occurrence positions of distinct keys, in draw order."""
    seen = set()
    first = []
    for index, key in enumerate(keys):
        if key not in seen:
            seen.add(key)
            first.append(index)
    return first


def infer_sampled(task: InferenceTask, seed=0, max_workers: Optional[int] = None,
                  keep_trajectories: bool = False) -> List[Candidate]:
    """
    Draw ``task.budget`` assignments from the prior, simulate and rank them.

    Repeated draws are evaluated once; each candidate keeps the index of its
    first draw so best-of-n for any n <= budget can be read off the ranking.
    """
    budget = validate_budget(task.budget)
    if budget == EXHAUSTIVE:
        raise DomainError("infer_sampled needs a finite budget; use infer_exhaustive")
    slots = draw_slot_vectors(task.density_prior, budget, seed)
    keys = [tuple(int(s) for s in row) for row in slots]
    first = _unique_draws(keys)
    return evaluate_candidates(task, [keys[i] for i in first], draw_indices=first,
                               max_workers=max_workers, keep_trajectories=keep_trajectories)


def _grid_values(stride: int) -> List[int]:
    return list(range(1, NUM_DENSITY_SLOTS + 1, stride))


def infer_exhaustive(task: InferenceTask, stride: int = 1, refine: bool = True,
                     max_workers: Optional[int] = None, verbose: bool = False,
                     keep: Optional[int] = None) -> List[Candidate]:
    """
    Enumerate slot vectors on a grid of the given stride, then refine.

    The coarse grid is 1, 1 + stride, ... per primitive. With stride > 1 the
    neighbourhood of +-stride slots around the coarse best is searched too:
    as a full product when it holds at most 1e6 vectors, otherwise one
    coordinate at a time.

    With ``keep`` set only the best ``keep`` candidates are returned and
    candidates that provably cannot reach them are not simulated to the
    end (see ``search_top``); otherwise every vector is ranked.

    Raises:
        SearchSpaceError: the coarse grid holds more than 1e6 vectors
    """
    if not isinstance(stride, (int, np.integer)) or stride < 1:
        raise DomainError(f"Stride must be a positive integer, got {stride!r}")
    k = task.num_primitives
    values = _grid_values(stride)
    size = len(values) ** k
    if size > MAX_SEARCH_CANDIDATES:
        smallest = next(s for s in range(stride, NUM_DENSITY_SLOTS + 1)
                        if len(_grid_values(s)) ** k <= MAX_SEARCH_CANDIDATES)
        raise SearchSpaceError(
            f"Exhaustive search over {k} primitives at stride {stride} needs {size} simulations "
            f"(limit {MAX_SEARCH_CANDIDATES}); use stride >= {smallest}"
        )

    if verbose:
        print(f"🔄 Enumerating {size} slot vectors (stride {stride})")
    coarse = [tuple(v) for v in itertools.product(values, repeat=k)]
    if keep is None:
        ranking = evaluate_candidates(task, coarse, max_workers=max_workers)
    else:
        ranking = search_top(task, coarse, keep, verbose=verbose)

    if stride > 1 and refine:
        best = ranking[0].slots
        windows = [list(range(max(1, b - stride), min(NUM_DENSITY_SLOTS, b + stride) + 1)) for b in best]
        if np.prod([len(w) for w in windows], dtype=float) <= MAX_SEARCH_CANDIDATES:
            local = [tuple(v) for v in itertools.product(*windows)]
        else:
            local = []
            for axis, window in enumerate(windows):
                for value in window:
                    vector = list(best)
                    vector[axis] = value
                    local.append(tuple(vector))
        evaluated = set(coarse)
        fresh = list(dict.fromkeys(v for v in local if v not in evaluated))
        if verbose:
            print(f"🔄 Refining around {best} with {len(fresh)} extra slot vectors")
        offset = len(coarse)
        if keep is None:
            refined = evaluate_candidates(task, fresh, draw_indices=range(offset, offset + len(fresh)),
                                          max_workers=max_workers)
            ranking = rank_candidates(ranking + refined)
        else:
            refined = search_top(task, fresh, keep, draw_offset=offset, verbose=verbose)
            ranking = rank_candidates(ranking + refined)[:keep]

    if verbose:
        print(f"✅ Best {ranking[0].slots} with score {ranking[0].score:.6g}")
    return ranking


def jitter_shape(shape: PrimitiveObject, offsets, resolution: int) -> List[Primitive]:
    """
    Move every face of every axis-aligned primitive by whole voxel cells.

    Args:
        shape: Fitted geometry
        offsets: (K, 6) integer offsets for faces (x_lo, x_hi, y_lo, y_hi, z_lo, z_hi)
        resolution: Voxel resolution defining the cell size

    Returns:
        Primitives in the input order; faces are clamped to the unit cube and
        an axis whose jitter would leave less than one cell keeps its faces.
    """
    cell = 1.0 / resolution
    offsets = np.asarray(offsets)
    jittered = []
    for primitive, offset in zip(shape.primitives, offsets):
        low, high = primitive.bounds()
        new_low, new_high = low.copy(), high.copy()
        for axis in range(3):
            lo = min(max(low[axis] + offset[2 * axis] * cell, -0.5), 0.5)
            hi = min(max(high[axis] + offset[2 * axis + 1] * cell, -0.5), 0.5)
            if hi - lo >= cell - 1e-12:
                new_low[axis], new_high[axis] = lo, hi
        jittered.append(Primitive(size=tuple(new_high - new_low),
                                  translation=tuple((new_low + new_high) / 2.0)))
    return jittered


def infer_with_shape(grid: VoxelGrid, observations: Sequence[Trajectory], budget: Budget, seed=0,
                     mode: str = 'phys', prior: Optional[DensityPrior] = None,
                     distance: str = 'mse', sim_config: Optional[SimConfig] = None,
                     fit_config: Optional[FitConfig] = None, stride: int = 1,
                     max_workers: Optional[int] = None, keep: Optional[int] = None) -> Tuple[PrimitiveObject, List[Candidate]]:
    """
    Infer densities when geometry must first be fitted from voxels.

    In 'phys' mode the fitted shape is used as is. In 'shape+phys' mode every
    sample also jitters each face of the fitted cuboids by -1, 0 or +1 cells,
    drawn from a stream seeded ``[seed, 1]``; slot draws match 'phys' mode.
    ``keep`` bounds the ranking of an exhaustive search (see ``infer_exhaustive``).

    Returns:
        Tuple of (shape of the best candidate, ranked candidates)
    """
    if mode not in INFERENCE_MODES:
        raise DomainError(f"Unknown inference mode '{mode}'. Use one of {INFERENCE_MODES}")
    shape = fit_primitives(grid, fit_config)
    task = InferenceTask(shape, tuple(observations), prior=prior, budget=budget,
                         distance=distance, sim_config=sim_config or SimConfig())

    if mode == 'phys':
        if task.budget == EXHAUSTIVE:
            return shape, infer_exhaustive(task, stride=stride, max_workers=max_workers, keep=keep)
        return shape, infer_sampled(task, seed, max_workers=max_workers)

    if task.budget == EXHAUSTIVE:
        raise DomainError("'shape+phys' mode needs a finite budget")
    slots = draw_slot_vectors(task.density_prior, task.budget, seed)
    jitter = np.random.default_rng(substream(seed, 1)).integers(-1, 2, size=(task.budget, len(shape), 6))

    keys, shapes, vectors = [], [], []
    for row, offsets in zip(slots, jitter):
        primitives = jitter_shape(shape, offsets, grid.resolution)
        obj = canonical_order([p.with_density(int(s)) for p, s in zip(primitives, row)])
        vectors.append(obj.slots)
        shapes.append(obj.geometry_only())
        keys.append((obj.slots, tuple(tuple(p.size + p.translation) for p in obj.primitives)))
    first = _unique_draws(keys)
    ranking = evaluate_candidates(task, [vectors[i] for i in first], shapes=[shapes[i] for i in first],
                                  draw_indices=first, max_workers=max_workers)
    return ranking[0].shape, ranking


def best_score_by_budget(ranking: Sequence[Candidate], budgets: Sequence[int],
                         metric: str = 'score') -> Dict[int, float]:
    """Best ``metric`` ('score' or 'mae') among the first n draws, for each n in ``budgets``."""
    if metric not in ('score', 'mae'):
        raise DomainError(f"metric must be 'score' or 'mae', got '{metric}'")
    result = {}
    for budget in budgets:
        scores = [getattr(c, metric) for c in ranking if c.draw_index < budget]
        result[budget] = min(scores) if scores else float('inf')
    return result
