"""
Evaluate an inference results document against its dataset and format
the metrics report (JSON plus an aligned text table)
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from .baselines import TrainingExample, baseline_frequent, baseline_nearest, baseline_oracle, random_guess
from .metrics import (
    TOPK_VALUES,
    density_rmse,
    mass_ratio_agreement,
    mass_ratio_class,
    per_primitive_rankings,
    primitive_correspondence,
    rmse_by_block_count,
    topk_accuracy,
    transfer_slots,
)
from ..core.primitives import PrimitiveObject
from ..dataset.records import Dataset
from ..utils.batch_processing import parallel_map
from ..utils.data_processing import atomic_write_text, write_json
from ..utils.error_handling import DataError, DomainError

BASELINES = ('frequent', 'nearest', 'oracle', 'random')


def _training_examples(dataset: Dataset, split: str) -> List[TrainingExample]:
    return [TrainingExample(record.slots, tuple(dataset.observations(record)))
            for record in dataset.split(split)]


def _task_rows(task: Dict[str, Any], dataset: Dataset, seed, frequent: Optional[int],
               train: List[TrainingExample], distance: str) -> List[Dict[str, Any]]:
    try:
        record = dataset.get(task['record_id'])
        pred_shape = PrimitiveObject.from_dict(task['shape'])
        pred_slots = [int(s) for s in task['pred_slots']]
        candidates = [entry['slots'] for entry in task.get('ranking', [])] or [pred_slots]
    except (KeyError, TypeError, DomainError) as e:
        raise DataError(f"Malformed result for task {task.get('record_id')!r}: {e}")

    mapping = primitive_correspondence(pred_shape, record.object)
    pred = transfer_slots(pred_slots, mapping)
    rankings = transfer_slots(per_primitive_rankings(candidates, len(pred_shape)), mapping)

    nearest = None
    if any(example.num_primitives == record.num_blocks for example in train):
        nearest, _ = baseline_nearest(train, dataset.observations(record), mode=distance,
                                      num_primitives=record.num_blocks)
    guesses = random_guess(record.num_blocks, seed=[int(seed), record.tower_index, record.config_index, 5])

    rows = []
    for k, truth in enumerate(record.slots):
        row = {
            'record_id': record.record_id,
            'num_blocks': record.num_blocks,
            'primitive': k,
            'truth': truth,
            'pred': pred[k],
            'frequent': frequent,
            'nearest': None if nearest is None else nearest[k],
            'oracle': None if not record.materials else baseline_oracle(
                record.materials[k], seed=[int(seed), record.tower_index, record.config_index, k, 4]),
            'random': guesses[k],
            'best_mae': task.get('best_mae'),
            'f1': task.get('f1'),
        }
        for top in TOPK_VALUES:
            row[f'top{top}'] = topk_accuracy(rankings[k], truth, top)
        rows.append(row)
    return rows


def _mass_ratio(tasks: List[Dict[str, Any]], dataset: Dataset, frame: pd.DataFrame) -> Optional[Dict]:
    pred_classes, true_classes = [], []
    for task in tasks:
        record = dataset.get(task['record_id'])
        if record.num_blocks != 2:
            continue
        pred = frame.loc[frame['record_id'] == record.record_id].sort_values('primitive')['pred'].tolist()
        pred_classes.append(mass_ratio_class(record.object, pred))
        true_classes.append(mass_ratio_class(record.object, record.slots))
    if not pred_classes:
        return None
    return mass_ratio_agreement(pred_classes, true_classes)


def evaluate_results(results: Dict[str, Any], dataset: Dataset, train_split: str = 'train',
                     max_workers: Optional[int] = None, verbose: bool = False) -> Dict[str, Any]:
    """
    Score a results document.

    Accuracy and RMSE are per primitive over all tasks. Predictions made on
    a fitted shape are scored against the true primitive they overlap most.
    Baselines use the training split of the same dataset.

    Raises:
        DataError: no tasks, or a task that does not refer to a dataset record
    """
    tasks = results.get('tasks') or []
    if not tasks:
        raise DataError("Results contain no tasks")
    seed = results.get('seed', 0)
    distance = results.get('distance', 'mse')

    train = _training_examples(dataset, train_split)
    frequent = baseline_frequent(train) if train else None
    if verbose:
        print(f"🔄 Evaluating {len(tasks)} tasks against {len(train)} training records")

    per_task = parallel_map(lambda task: _task_rows(task, dataset, seed, frequent, train, distance),
                            tasks, max_workers=max_workers, desc="Evaluating tasks")
    frame = pd.DataFrame([row for rows in per_task for row in rows])

    baselines = {}
    for name in BASELINES:
        available = frame[frame[name].notna()]
        baselines[name] = {
            'rmse': density_rmse(available[name].astype(int), available['truth']) if len(available) else None,
            'count': int(len(available)),
        }

    by_block = rmse_by_block_count(frame[['num_blocks', 'pred', 'truth']])
    maes = [t['best_mae'] for t in tasks if t.get('best_mae') is not None]
    f1s = [t['f1'] for t in tasks if t.get('f1') is not None]

    report = {
        'seed': seed,
        'budget': results.get('budget'),
        'mode': results.get('mode'),
        'topk': {str(k): float(frame[f'top{k}'].mean()) for k in TOPK_VALUES},
        'rmse': density_rmse(frame['pred'], frame['truth']),
        'rmse_by_block_count': {
            str(blocks): {'rmse': float(row['rmse']), 'count': int(row['count'])}
            for blocks, row in by_block.iterrows()
        },
        'mean_best_mae': float(np.mean(maes)) if maes else None,
        'mean_f1': float(np.mean(f1s)) if f1s else None,
        'mass_ratio': _mass_ratio(tasks, dataset, frame),
        'baselines': baselines,
        'counts': {
            'tasks': len(tasks),
            'primitives': int(len(frame)),
            'train_records': len(train),
        },
    }
    if verbose:
        print(f"📊 top-1 {report['topk']['1']:.3f}, RMSE {report['rmse']:.3f} over {len(frame)} primitives")
    return report


def _clean(value):
    """NaN and infinities become None so the report is strict JSON."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def format_report(report: Dict[str, Any]) -> str:
    """Aligned-column text rendering of a metrics report."""
    report = _clean(report)
    counts = report['counts']
    metrics = [(f"top-{k} accuracy", value, counts['primitives']) for k, value in report['topk'].items()]
    metrics.append(("RMSE (slots)", report['rmse'], counts['primitives']))
    metrics.append(("mean best MAE", report['mean_best_mae'], counts['tasks']))
    metrics.append(("mean F1", report['mean_f1'], counts['tasks']))
    if report.get('mass_ratio'):
        ratio = report['mass_ratio']
        metrics.append(("mass-ratio accuracy", ratio['accuracy'], ratio['count']))
        metrics.append(("mass-ratio Pearson r", ratio['pearson_r'], ratio['count']))
    for name, entry in report['baselines'].items():
        metrics.append((f"baseline {name} RMSE", entry['rmse'], entry['count']))
    table = pd.DataFrame(metrics, columns=['metric', 'value', 'count'])

    blocks = pd.DataFrame.from_dict(report['rmse_by_block_count'], orient='index')
    blocks.index.name = 'num_blocks'

    sections = [
        f"Evaluation report (seed {report['seed']}, budget {report['budget']}, mode {report['mode']})",
        table.to_string(index=False, float_format=lambda v: f"{v:.4f}", na_rep='-'),
        "",
        "RMSE by block count",
        blocks.to_string(float_format=lambda v: f"{v:.4f}"),
    ]
    return "\n".join(sections) + "\n"


def write_report(report: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Write the JSON report and its text rendering next to it (``.txt``)."""
    path = Path(path)
    write_json(path, _clean(report))
    atomic_write_text(path.with_suffix('.txt'), format_report(report))
    return path
