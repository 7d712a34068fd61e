"""
Baselines, metrics, diagnostic losses and evaluation reports
"""

from .baselines import TrainingExample, baseline_frequent, baseline_nearest, baseline_oracle, random_guess
from .losses import MetricConfig, calibrate_physics_weight, geometry_loss, physics_loss, total_loss
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
from .report import evaluate_results, format_report, write_report

__all__ = [
    'TrainingExample',
    'baseline_frequent',
    'baseline_nearest',
    'baseline_oracle',
    'random_guess',
    'MetricConfig',
    'calibrate_physics_weight',
    'geometry_loss',
    'physics_loss',
    'total_loss',
    'TOPK_VALUES',
    'density_rmse',
    'mass_ratio_agreement',
    'mass_ratio_class',
    'per_primitive_rankings',
    'primitive_correspondence',
    'rmse_by_block_count',
    'topk_accuracy',
    'transfer_slots',
    'evaluate_results',
    'format_report',
    'write_report',
]
