"""Features derived from a trained autoencoder.

Two signals come out of the network: the per-sample reconstruction error and
the bottleneck activation vector. Classifiers consume one of three feature
layouts; when both signals are combined the error is always the first entry.
Features feed the classifiers without re-scaling.
"""

from __future__ import annotations

import enum
from pathlib import Path

import numpy as np

from .autoencoder import AutoencoderModel, _forward_arrays, forward, mse_loss


class FeatureMode(enum.Enum):
    RE_ONLY = "re_only"
    SIL_ONLY = "sil_only"
    RE_AND_SIL = "re_and_sil"

    def width(self, bottleneck_dim: int = 16) -> int:
        if self is FeatureMode.RE_ONLY:
            return 1
        if self is FeatureMode.SIL_ONLY:
            return bottleneck_dim
        return 1 + bottleneck_dim


ALL_MODES = (FeatureMode.RE_ONLY, FeatureMode.SIL_ONLY, FeatureMode.RE_AND_SIL)


def reconstruction_error(model: AutoencoderModel, x: np.ndarray) -> float:
    """Mean squared distance between the input and its reconstruction."""
    trace = forward(model, x)
    return mse_loss(x, trace.reconstruction)


def bottleneck_output(model: AutoencoderModel, x: np.ndarray) -> np.ndarray:
    """Post-ReLU activations of the bottleneck layer (all entries >= 0)."""
    trace = forward(model, x)
    return trace.bottleneck(model)


def features_batch(
    model: AutoencoderModel, vectors: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One forward pass yielding (errors, bottlenecks) for a batch."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape[1] != model.input_dim:
        raise ValueError(
            f"expected (n, {model.input_dim}) array, got {vectors.shape}"
        )
    _, activations = _forward_arrays(model, vectors)
    errors = np.mean((activations[-1] - vectors) ** 2, axis=1)
    return errors, activations[model.bottleneck_index]


def assemble(
    errors: np.ndarray, bottlenecks: np.ndarray, mode: FeatureMode
) -> np.ndarray:
    """Lay out precomputed signals as an (n, width) feature matrix."""
    if mode is FeatureMode.RE_ONLY:
        return errors.reshape(-1, 1)
    if mode is FeatureMode.SIL_ONLY:
        return bottlenecks
    return np.hstack([errors.reshape(-1, 1), bottlenecks])


def extract(model: AutoencoderModel, x: np.ndarray, mode: FeatureMode) -> np.ndarray:
    """Feature vector for a single sample under the given mode."""
    errors, bottlenecks = features_batch(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return assemble(errors, bottlenecks, mode)[0]


def extract_batch(
    model: AutoencoderModel, vectors: np.ndarray, mode: FeatureMode
) -> np.ndarray:
    errors, bottlenecks = features_batch(model, vectors)
    return assemble(errors, bottlenecks, mode)


def dump_features(path: str | Path, mode: FeatureMode, features: np.ndarray) -> None:
    """Write features as comma-separated rows under a one-line header."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write(f"{mode.value},{features.shape[1]}\n")
        for row in features:
            handle.write(",".join(repr(v) for v in row.tolist()) + "\n")
