"""Encoding, scaling, and data splitting for the cross-validated experiment.

Each fold uses three disjoint sets: the autoencoder trains on half of the
fold's normal training records, the decision algorithms train on the other
half balanced with sampled anomalies, and the held-out partition is the test
set. MinMax factors are fitted on the decision-training set only and applied
unchanged to all three sets.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import CATEGORICAL, BinaryLabel, FeatureSchema, RawRecord

logger = logging.getLogger(__name__)


@dataclass
class MinMaxParams:
    minima: np.ndarray
    maxima: np.ndarray


@dataclass
class PreprocessParams:
    """Everything needed to encode and scale new records identically."""

    vocabularies: dict[str, tuple[str, ...]]
    minmax: MinMaxParams | None = None


@dataclass
class FoldSplit:
    """Index arrays (into the full record list) for one fold's three sets.

    ``anomaly_fraction`` is the achieved anomalous/normal ratio of the
    decision-training set; 1.0 unless the fold ran out of anomalies.
    """

    ae_train: np.ndarray
    thr_train: np.ndarray
    test: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    anomaly_fraction: float = 1.0


def one_hot_encode(record: RawRecord, schema: FeatureSchema) -> np.ndarray:
    """Encode one record: numeric columns copied, categoricals one-hot expanded."""
    out = np.zeros(schema.encoded_dimension())
    pos = 0
    for (name, kind), value in zip(schema.columns, record.values):
        if kind == CATEGORICAL:
            vocab = schema.vocabularies[name]
            try:
                out[pos + vocab.index(value)] = 1.0
            except ValueError:
                raise ValueError(
                    f"unseen category {value!r} in column {name!r}"
                ) from None
            pos += len(vocab)
        else:
            out[pos] = float(value)
            pos += 1
    return out


def encode_records(records: Sequence[RawRecord], schema: FeatureSchema) -> np.ndarray:
    """Encode many records into an (n, dim) array."""
    dim = schema.encoded_dimension()
    offsets: list[tuple[int, int, dict[str, int] | None]] = []
    pos = 0
    for idx, (name, kind) in enumerate(schema.columns):
        if kind == CATEGORICAL:
            vocab = schema.vocabularies[name]
            offsets.append((idx, pos, {v: i for i, v in enumerate(vocab)}))
            pos += len(vocab)
        else:
            offsets.append((idx, pos, None))
            pos += 1
    out = np.zeros((len(records), dim))
    for row, record in enumerate(records):
        values = record.values
        for idx, base, lookup in offsets:
            if lookup is None:
                out[row, base] = float(values[idx])
            else:
                try:
                    out[row, base + lookup[values[idx]]] = 1.0
                except KeyError:
                    raise ValueError(
                        f"unseen category {values[idx]!r} in column "
                        f"{schema.columns[idx][0]!r}"
                    ) from None
    return out


def fit_minmax(vectors: np.ndarray) -> MinMaxParams:
    """Per-dimension minima and maxima over the fitting set."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise ValueError("fit_minmax needs a non-empty (n, dim) array")
    return MinMaxParams(minima=vectors.min(axis=0), maxima=vectors.max(axis=0))


def apply_minmax(vectors: np.ndarray, params: MinMaxParams) -> np.ndarray:
    """Scale by the fitted range; degenerate dimensions map to 0, no clipping."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.shape[-1] != params.minima.shape[0]:
        raise ValueError(
            f"dimension mismatch: vectors have {vectors.shape[-1]}, "
            f"params have {params.minima.shape[0]}"
        )
    span = params.maxima - params.minima
    safe = np.where(span > 0, span, 1.0)
    scaled = (vectors - params.minima) / safe
    return np.where(span > 0, scaled, 0.0)


def stratified_kfold(
    labels: Sequence[BinaryLabel] | np.ndarray, k: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic stratified k-fold partition over binary labels.

    Returns k (train_indices, test_indices) pairs. Every index lands in
    exactly one test partition and per-fold class counts stay within one
    sample of the global proportion.
    """
    mask = _as_mask(labels)
    n = mask.shape[0]
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if not mask.any() or mask.all():
        raise ValueError("both classes must be present for stratified folding")
    class_indices = [np.flatnonzero(~mask), np.flatnonzero(mask)]
    smallest = min(len(idx) for idx in class_indices)
    if k > smallest:
        raise ValueError(
            f"k={k} exceeds the smallest class count ({smallest})"
        )
    rng = np.random.default_rng(seed)
    chunks: list[list[np.ndarray]] = []
    for idx in class_indices:
        shuffled = rng.permutation(idx)
        chunks.append(np.array_split(shuffled, k))
    folds = []
    all_indices = np.arange(n)
    for i in range(k):
        test = np.sort(np.concatenate([chunks[0][i], chunks[1][i]]))
        train = np.setdiff1d(all_indices, test, assume_unique=True)
        folds.append((train, test))
    return folds


def make_fold_split(
    train_indices: np.ndarray,
    labels: Sequence[BinaryLabel] | np.ndarray,
    seed: int,
    test_indices: np.ndarray | None = None,
) -> FoldSplit:
    """Split a fold's training partition into AE-training and decision-training sets.

    Normal records are shuffled and halved; the first half goes to the
    autoencoder, the second half is balanced 1:1 with anomalies sampled
    without replacement (all of them, if fewer exist than normals).
    """
    mask = _as_mask(labels)
    train_indices = np.asarray(train_indices, dtype=np.intp)
    normals = train_indices[~mask[train_indices]]
    anomalies = train_indices[mask[train_indices]]
    if normals.size == 0:
        raise ValueError("training partition has no normal samples")
    if anomalies.size == 0:
        raise ValueError("training partition has no anomalous samples")
    rng = np.random.default_rng(seed)
    shuffled = rng.permutation(normals)
    half = shuffled.size // 2
    ae_train = shuffled[:half]
    thr_normals = shuffled[half:]
    take = min(thr_normals.size, anomalies.size)
    thr_anomalies = rng.permutation(anomalies)[:take]
    fraction = take / thr_normals.size
    if fraction < 1.0:
        logger.warning(
            "decision-training set unbalanced: %d anomalies for %d normals (%.3f)",
            take,
            thr_normals.size,
            fraction,
        )
    return FoldSplit(
        ae_train=ae_train,
        thr_train=np.concatenate([thr_normals, thr_anomalies]),
        test=np.asarray(test_indices, dtype=np.intp)
        if test_indices is not None
        else np.empty(0, dtype=np.intp),
        anomaly_fraction=fraction,
    )


def stratified_subsample(
    labels: Sequence[BinaryLabel] | np.ndarray, cap: int, seed: int
) -> np.ndarray:
    """Class-proportional random subsample of at most ``cap`` indices, sorted."""
    mask = _as_mask(labels)
    n = mask.shape[0]
    if cap >= n:
        return np.arange(n)
    if cap < 2:
        raise ValueError(f"subsample cap must be >= 2, got {cap}")
    rng = np.random.default_rng(seed)
    positives = np.flatnonzero(mask)
    negatives = np.flatnonzero(~mask)
    take_pos = int(round(cap * positives.size / n))
    take_pos = min(max(take_pos, 1), cap - 1)
    keep = np.concatenate(
        [
            rng.choice(positives, size=take_pos, replace=False),
            rng.choice(negatives, size=cap - take_pos, replace=False),
        ]
    )
    return np.sort(keep)


def _as_mask(labels: Sequence[BinaryLabel] | np.ndarray) -> np.ndarray:
    if isinstance(labels, np.ndarray) and labels.dtype == bool:
        return labels
    return np.fromiter(
        (lab is BinaryLabel.ANOMALOUS for lab in labels),
        dtype=bool,
    )
