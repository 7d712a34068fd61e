"""
Dataset-level inference runs and the sampling-budget sweep
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .search import (
    EXHAUSTIVE,
    INFERENCE_MODES,
    Budget,
    InferenceTask,
    best_score_by_budget,
    infer_exhaustive,
    infer_sampled,
    infer_with_shape,
    validate_budget,
)
from ..dataset.records import Dataset, DatasetRecord
from ..shapefit.scoring import f1_score
from ..utils.config import ExperimentConfig, get_global_config
from ..utils.error_handling import DomainError


def task_seed(seed: int, record: DatasetRecord) -> List[int]:
    """Per-record inference seed, independent of task order."""
    return [int(seed), record.tower_index, record.config_index, 3]


def select_records(dataset: Dataset, split: str = 'test', max_tasks: Optional[int] = None) -> List[DatasetRecord]:
    records = dataset.split(split)
    if not records:
        # single-split datasets (tiny smoke runs) fall back to every record
        records = list(dataset.records)
    if max_tasks is not None:
        records = records[:max_tasks]
    return records


def infer_record(dataset: Dataset, record: DatasetRecord, config: ExperimentConfig,
                 budget: Budget, mode: str, seed, max_workers: Optional[int] = None):
    """
    Run inference on one dataset record.

    Exhaustive searches only rank the best ``ranking_keep`` candidates
    (global setting), the part of the ranking that results keep.

    Returns:
        Tuple of (shape the ranking refers to, ranked candidates)
    """
    keep = get_global_config('ranking_keep') or 32
    observations = dataset.observations(record)
    sim_config = config.sim_config()
    if mode == 'phys' and config.known_shape:
        task = InferenceTask(record.object, tuple(observations), budget=budget,
                             distance=config.distance, sim_config=sim_config)
        if task.budget == EXHAUSTIVE:
            return task.shape, infer_exhaustive(task, stride=config.stride, max_workers=max_workers, keep=keep)
        return task.shape, infer_sampled(task, seed, max_workers=max_workers)
    return infer_with_shape(dataset.voxels(record), observations, budget, seed=seed, mode=mode,
                            distance=config.distance, sim_config=sim_config, stride=config.stride,
                            max_workers=max_workers, keep=keep)


def run_inference(dataset: Dataset, config: ExperimentConfig, split: str = 'test',
                  max_workers: Optional[int] = None, verbose: bool = False) -> Dict[str, Any]:
    """
    Infer densities for every record of a split and collect a results document.

    Each task keeps its best ``ranking_keep`` candidates (global setting),
    the predicted slots, the best score and MAE, and the F1 of the shape the
    prediction refers to.
    """
    from .. import __version__

    budget = validate_budget(config.budget)
    if config.mode not in INFERENCE_MODES:
        raise DomainError(f"Unknown inference mode '{config.mode}'")
    keep = get_global_config('ranking_keep') or 32
    records = select_records(dataset, split, config.max_tasks)

    if verbose:
        print(f"🔄 Inferring densities for {len(records)} records (budget {budget}, mode {config.mode})")

    tasks = []
    for record in records:
        seed = task_seed(config.seed, record)
        shape, ranking = infer_record(dataset, record, config, budget, config.mode, seed, max_workers)
        best = ranking[0]
        best_shape = best.shape if best.shape is not None else shape
        tasks.append({
            'record_id': record.record_id,
            'tower_index': record.tower_index,
            'config_index': record.config_index,
            'num_blocks': record.num_blocks,
            'seed': seed,
            'truth_slots': list(record.slots),
            'materials': list(record.materials or []),
            'pred_slots': list(best.slots),
            'best_score': best.score if np.isfinite(best.score) else None,
            'best_mae': best.mae if np.isfinite(best.mae) else None,
            'num_evaluated': len(ranking),
            'shape': best_shape.to_dict(),
            'f1': f1_score(best_shape, record.object),
            'ranking': [c.to_dict() for c in ranking[:keep]],
        })
        if verbose:
            print(f"✅ {record.record_id}: predicted {best.slots}, truth {record.slots}, score {best.score:.6g}")

    return {
        'tool': 'physprim',
        'version': __version__,
        'seed': config.seed,
        'budget': budget,
        'mode': config.mode,
        'distance': config.distance,
        'stride': config.stride,
        'known_shape': config.known_shape,
        'split': split,
        'dataset': str(dataset.root),
        'tasks': tasks,
    }


def run_sweep(dataset: Dataset, config: ExperimentConfig,
              budgets: Optional[Sequence[int]] = None,
              modes: Sequence[str] = INFERENCE_MODES, split: str = 'test',
              max_workers: Optional[int] = None, verbose: bool = False) -> pd.DataFrame:
    """
    Mean best-of-n MAE for each inference mode and sampling budget.

    One run at the largest budget serves every smaller budget, since draws
    are nested. Best-of-n is taken over the MAE of the first n draws.

    Returns:
        DataFrame with one row per mode, one column per budget and a
        ``tasks`` column with the number of records averaged
    """
    budgets = sorted(validate_budget(b) for b in (budgets or config.budgets) if b != EXHAUSTIVE)
    if not budgets:
        raise DomainError("The sweep needs at least one finite budget")
    records = select_records(dataset, split, config.max_tasks)
    largest = budgets[-1]

    rows = {}
    for mode in modes:
        if verbose:
            print(f"🔄 Sweeping mode '{mode}' over budgets {budgets} on {len(records)} records")
        per_task = []
        for record in records:
            _, ranking = infer_record(dataset, record, config, largest, mode,
                                      task_seed(config.seed, record), max_workers)
            per_task.append(best_score_by_budget(ranking, budgets, metric='mae'))
        rows[mode] = {budget: float(np.mean([t[budget] for t in per_task])) for budget in budgets}
        rows[mode]['tasks'] = len(per_task)

    table = pd.DataFrame.from_dict(rows, orient='index')
    table.index.name = 'mode'
    return table


def sweep_to_dict(table: pd.DataFrame, config: ExperimentConfig) -> Dict[str, Any]:
    """JSON-friendly sweep document (budgets as string keys)."""
    rows = {}
    for mode, row in table.iterrows():
        rows[mode] = {str(k): (float(v) if np.isfinite(v) else None)
                      for k, v in row.items() if k != 'tasks'}
    return {
        'seed': config.seed,
        'metric': 'mae',
        'budgets': [int(c) for c in table.columns if c != 'tasks'],
        'tasks': int(table['tasks'].iloc[0]) if len(table) else 0,
        'rows': rows,
    }
