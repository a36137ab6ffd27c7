"""Exact k-nearest-neighbors with Euclidean distance.

A lazy learner: fitting stores the training data verbatim. Prediction takes
the majority label of the k nearest points. Equal distances are resolved
toward the lower training index (stable sort) and an even-k vote tie counts
as anomalous, so suspicious traffic is never swallowed by a coin flip.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dataset import BinaryLabel, anomalous_mask


@dataclass
class KnnModel:
    points: np.ndarray
    anomalous: np.ndarray
    k: int


def fit_knn(
    points: np.ndarray,
    labels: Sequence[BinaryLabel] | np.ndarray,
    k: int = 11,
) -> KnnModel:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mask = _as_mask(labels)
    if points.shape[0] != mask.shape[0]:
        raise ValueError("points and labels have different lengths")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > points.shape[0]:
        raise ValueError(
            f"k={k} exceeds the training size ({points.shape[0]})"
        )
    if k % 2 == 0:
        warnings.warn(
            f"even k={k}: vote ties are resolved as anomalous", stacklevel=2
        )
    return KnnModel(points=points, anomalous=mask, k=k)


def predict_knn(model: KnnModel, x: np.ndarray) -> BinaryLabel:
    mask = predict_knn_batch(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return BinaryLabel.ANOMALOUS if mask[0] else BinaryLabel.NORMAL


def predict_knn_batch(
    model: KnnModel, queries: np.ndarray, chunk_size: int = 256
) -> np.ndarray:
    """Boolean anomalous mask for a batch of query points.

    Distances are computed chunk-wise via the squared-norm expansion; a
    stable argsort keeps equal distances in training-index order.
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if queries.shape[1] != model.points.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries have {queries.shape[1]}, "
            f"model has {model.points.shape[1]}"
        )
    point_norms = np.einsum("ij,ij->i", model.points, model.points)
    out = np.empty(queries.shape[0], dtype=bool)
    for start in range(0, queries.shape[0], chunk_size):
        chunk = queries[start : start + chunk_size]
        d2 = (
            point_norms[None, :]
            + np.einsum("ij,ij->i", chunk, chunk)[:, None]
            - 2.0 * chunk @ model.points.T
        )
        np.maximum(d2, 0.0, out=d2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
        votes = model.anomalous[nearest].sum(axis=1)
        # Strict majority is anomalous; an even-k tie also flags anomalous.
        out[start : start + chunk.shape[0]] = 2 * votes >= model.k
    return out


def _as_mask(labels: Sequence[BinaryLabel] | np.ndarray) -> np.ndarray:
    if isinstance(labels, np.ndarray) and labels.dtype == bool:
        return labels
    return anomalous_mask(labels)
