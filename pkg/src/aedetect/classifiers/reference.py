"""Z-score baseline: a fixed cutoff on the reconstruction error.

The cutoff is mean + z * std of the training errors; with z = 0 (no
contamination assumed) it reduces to the plain mean. Population standard
deviation (divide by n) is used so the fitted threshold is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dataset import BinaryLabel


@dataclass(frozen=True)
class ReferenceThreshold:
    mean_error: float
    std_error: float
    z_score: float
    threshold: float


def fit_reference(
    train_errors: Sequence[float] | np.ndarray, z_score: float = 0.0
) -> ReferenceThreshold:
    errors = np.asarray(train_errors, dtype=float)
    if errors.size == 0:
        raise ValueError("cannot fit a threshold on an empty error list")
    mean = float(errors.mean())
    std = float(errors.std())
    return ReferenceThreshold(
        mean_error=mean,
        std_error=std,
        z_score=z_score,
        threshold=mean + z_score * std,
    )


def classify_reference(thr: ReferenceThreshold, error: float) -> BinaryLabel:
    """Normal when the error does not exceed the cutoff (boundary inclusive)."""
    return BinaryLabel.NORMAL if error <= thr.threshold else BinaryLabel.ANOMALOUS


def classify_reference_batch(
    thr: ReferenceThreshold, errors: np.ndarray
) -> np.ndarray:
    """Boolean anomalous mask for a batch of reconstruction errors."""
    return np.asarray(errors, dtype=float) > thr.threshold
