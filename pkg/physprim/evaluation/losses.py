"""
Diagnostic losses: geometry (L1 over primitive parameters) and physics
(cross-entropy of the density prior against the true slots)
"""

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core.materials import validate_slot
from ..core.priors import DensityPrior
from ..core.primitives import PrimitiveObject
from ..utils.error_handling import DomainError, ValidationError
from ..utils.rotations import align_hemisphere

PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricConfig:
    """Loss weights; ``physics_weight`` None means 1 until calibrated."""

    size_weight: float = 1.0
    translation_weight: float = 1.0
    rotation_weight: float = 1.0
    physics_weight: Optional[float] = None

    def __post_init__(self):
        weights = {
            'size_weight': self.size_weight,
            'translation_weight': self.translation_weight,
            'rotation_weight': self.rotation_weight,
        }
        if self.physics_weight is not None:
            weights['physics_weight'] = self.physics_weight
        violations = [f"{name} must be positive, got {value}" for name, value in weights.items()
                      if not value > 0]
        if violations:
            raise ValidationError("Invalid metric configuration", violations)


def geometry_loss(pred: PrimitiveObject, truth: PrimitiveObject,
                  config: Optional[MetricConfig] = None) -> float:
    """Summed weighted L1 distance of size, translation and (sign-aligned) rotation."""
    config = config or MetricConfig()
    if len(pred) != len(truth):
        raise DomainError(f"{len(pred)} predicted primitives for {len(truth)} true primitives")
    total = 0.0
    for p, t in zip(pred.primitives, truth.primitives):
        rotation = align_hemisphere(p.rotation, t.rotation)
        total += config.size_weight * np.abs(np.subtract(p.size, t.size)).sum()
        total += config.translation_weight * np.abs(np.subtract(p.translation, t.translation)).sum()
        total += config.rotation_weight * np.abs(rotation - np.asarray(t.rotation)).sum()
    return float(total)


def physics_loss(prior: DensityPrior, truth_slots: Sequence[int]) -> float:
    """
    Summed cross-entropy of one-hot true slots against the prior rows.

    Probabilities below 1e-12 at the true slot are clamped, with a RuntimeWarning.
    Slots outside 1..100 raise DomainError.
    """
    if len(truth_slots) != len(prior):
        raise DomainError(f"prior covers {len(prior)} primitives, {len(truth_slots)} true slots given")
    columns = np.array([validate_slot(s) for s in truth_slots], dtype=int) - 1
    probabilities = prior.probabilities[np.arange(len(prior)), columns]
    if np.any(probabilities < PROBABILITY_FLOOR):
        warnings.warn(f"Probability at the true slot below {PROBABILITY_FLOOR}; clamped",
                      RuntimeWarning, stacklevel=2)
    return float(-np.sum(np.log(np.maximum(probabilities, PROBABILITY_FLOOR))))


def calibrate_physics_weight(geometry_losses: Sequence[float], physics_losses: Sequence[float]) -> float:
    """Weight that makes both loss terms equal in median over a calibration batch."""
    geometry = np.asarray(geometry_losses, dtype=float)
    physics = np.asarray(physics_losses, dtype=float)
    if geometry.size == 0 or physics.size == 0:
        raise DomainError("calibration needs at least one geometry and one physics loss")
    physics_median = float(np.median(physics))
    if physics_median <= 0.0:
        raise DomainError("median physics loss is zero; the weight is undefined")
    return float(np.median(geometry)) / physics_median


def total_loss(pred: PrimitiveObject, truth: PrimitiveObject, prior: DensityPrior,
               config: Optional[MetricConfig] = None) -> float:
    """L_G + w * L_P with the true slots taken from ``truth``."""
    config = config or MetricConfig()
    if not truth.has_densities:
        raise DomainError("total_loss needs density slots on the true object")
    weight = 1.0 if config.physics_weight is None else config.physics_weight
    return geometry_loss(pred, truth, config) + weight * physics_loss(prior, truth.slots)
