"""
Density priors - per-primitive categorical distributions over density slots

The prior file is the hand-off point for an external model: a JSON array
with one 100-element probability vector per primitive.
"""

import json
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .materials import NUM_DENSITY_SLOTS, material_slots, validate_slot
from ..utils.error_handling import DataError, ValidationError

PROBABILITY_TOLERANCE = 1e-9


class DensityPrior:
    """Per-primitive probability vectors over the 100 density slots."""

    def __init__(self, probabilities):
        array = np.array(probabilities, dtype=float)
        if array.ndim == 1:
            array = array[np.newaxis, :]
        violations = []
        if array.ndim != 2 or array.shape[1] != NUM_DENSITY_SLOTS or array.shape[0] == 0:
            violations.append(f"expected shape (K, {NUM_DENSITY_SLOTS}), got {array.shape}")
        else:
            if not np.all(np.isfinite(array)) or np.any(array < 0.0):
                violations.append("probabilities must be finite and non-negative")
            sums = array.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > PROBABILITY_TOLERANCE)
            if bad.size:
                violations.append(f"rows {bad.tolist()} do not sum to 1 (sums {sums[bad].tolist()})")
        if violations:
            raise ValidationError("Invalid density prior", violations)
        array.setflags(write=False)
        self._probabilities = array

    def __len__(self):
        return self._probabilities.shape[0]

    def __repr__(self):
        return f"DensityPrior({len(self)} primitives)"

    @property
    def probabilities(self) -> np.ndarray:
        return self._probabilities

    def cdf(self) -> np.ndarray:
        cumulative = np.cumsum(self._probabilities, axis=1)
        cumulative[:, -1] = 1.0
        return cumulative

    def sample(self, uniforms) -> np.ndarray:
        """
        Map uniforms of shape (n, K) to slot vectors by inverse CDF.

        Candidate-major uniforms keep draws nested across budgets: the first
        n rows of a longer draw equal a draw of n rows.
        """
        uniforms = np.asarray(uniforms, dtype=float)
        cdf = self.cdf()
        slots = np.empty(uniforms.shape, dtype=int)
        for k in range(len(self)):
            slots[:, k] = np.searchsorted(cdf[k], uniforms[:, k], side='right') + 1
        return np.minimum(slots, NUM_DENSITY_SLOTS)

    def to_list(self):
        return self._probabilities.tolist()

    @classmethod
    def uniform(cls, num_primitives: int) -> "DensityPrior":
        return cls(np.full((num_primitives, NUM_DENSITY_SLOTS), 1.0 / NUM_DENSITY_SLOTS))

    @classmethod
    def one_hot(cls, slots: Sequence[int]) -> "DensityPrior":
        array = np.zeros((len(slots), NUM_DENSITY_SLOTS))
        for k, slot in enumerate(slots):
            array[k, validate_slot(slot) - 1] = 1.0
        return cls(array)

    @classmethod
    def from_materials(cls, materials: Sequence) -> "DensityPrior":
        """Uniform over each primitive's material slots."""
        array = np.zeros((len(materials), NUM_DENSITY_SLOTS))
        for k, material in enumerate(materials):
            slots = sorted(material_slots(material))
            array[k, np.array(slots) - 1] = 1.0 / len(slots)
        return cls(array)


def read_prior(path: Union[str, Path]) -> DensityPrior:
    path = Path(path)
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise DataError("Prior file not found", path=str(path))
    except json.JSONDecodeError as e:
        raise DataError(f"Prior file is not valid JSON: {e.msg}", path=str(path), line=e.lineno)
    return DensityPrior(data)


def write_prior(prior: DensityPrior, path: Union[str, Path]) -> Path:
    from ..utils.data_processing import atomic_write_text

    return atomic_write_text(path, json.dumps(prior.to_list()))
