"""
Density inference by sampling, simulating and selecting
"""

from .distance import DISTANCE_MODES, interaction_distances, trajectory_distance
from .rollouts import CandidateRollouts
from .search import (
    EXHAUSTIVE,
    INFERENCE_MODES,
    STANDARD_BUDGETS,
    Candidate,
    InferenceTask,
    best_score_by_budget,
    draw_slot_vectors,
    evaluate_candidate,
    evaluate_candidates,
    infer_exhaustive,
    infer_sampled,
    infer_with_shape,
    jitter_shape,
    rank_candidates,
    search_top,
    substream,
    validate_budget,
)
from .runner import run_inference, run_sweep, sweep_to_dict, task_seed

__all__ = [
    'DISTANCE_MODES',
    'interaction_distances',
    'trajectory_distance',
    'EXHAUSTIVE',
    'INFERENCE_MODES',
    'STANDARD_BUDGETS',
    'Candidate',
    'InferenceTask',
    'best_score_by_budget',
    'draw_slot_vectors',
    'evaluate_candidate',
    'evaluate_candidates',
    'infer_exhaustive',
    'infer_sampled',
    'infer_with_shape',
    'jitter_shape',
    'CandidateRollouts',
    'rank_candidates',
    'search_top',
    'substream',
    'validate_budget',
    'run_inference',
    'run_sweep',
    'sweep_to_dict',
    'task_seed',
]
