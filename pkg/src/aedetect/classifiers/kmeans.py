"""Two-cluster Lloyd iteration with k-means++ seeding.

Clustering alone yields unlabeled groups, so each cluster is tagged with the
majority label of its assigned training points (ties flag anomalous).
The per-iteration inertia sequence is recorded; Lloyd updates never increase
it, and an emptied cluster is re-seeded on the point farthest from its
centroid, which also strictly decreases inertia.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dataset import BinaryLabel, anomalous_mask


@dataclass
class KMeansModel:
    centroids: np.ndarray
    cluster_anomalous: np.ndarray
    inertia: float
    inertia_history: list[float]
    n_iterations: int
    converged: bool


def fit_kmeans(
    points: np.ndarray,
    labels: Sequence[BinaryLabel] | np.ndarray,
    k: int = 2,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-4,
) -> KMeansModel:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mask = _as_mask(labels)
    if points.shape[0] != mask.shape[0]:
        raise ValueError("points and labels have different lengths")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not (points != points[0]).any():
        raise ValueError("all points are identical; nothing to cluster")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(points, k, rng)
    history: list[float] = []
    iterations = 0
    converged = False
    for _ in range(max_iter):
        iterations += 1
        assign, min_d2, centroids = _assign(points, centroids)
        history.append(float(min_d2.sum()))
        new_centroids = _means(points, assign, centroids)
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift < tol:
            converged = True
            break
    assign, min_d2, centroids = _assign(points, centroids)
    history.append(float(min_d2.sum()))
    cluster_anomalous = np.zeros(k, dtype=bool)
    for j in range(k):
        members = mask[assign == j]
        # Majority label; an exact tie (or an empty cluster) flags anomalous.
        cluster_anomalous[j] = members.size == 0 or 2 * members.sum() >= members.size
    return KMeansModel(
        centroids=centroids,
        cluster_anomalous=cluster_anomalous,
        inertia=history[-1],
        inertia_history=history,
        n_iterations=iterations,
        converged=converged,
    )


def predict_kmeans(model: KMeansModel, x: np.ndarray) -> BinaryLabel:
    mask = predict_kmeans_batch(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return BinaryLabel.ANOMALOUS if mask[0] else BinaryLabel.NORMAL


def predict_kmeans_batch(model: KMeansModel, queries: np.ndarray) -> np.ndarray:
    """Boolean anomalous mask: nearest centroid's label, ties to lower index."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if queries.shape[1] != model.centroids.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries have {queries.shape[1]}, "
            f"centroids have {model.centroids.shape[1]}"
        )
    nearest = np.argmin(_distances_sq(queries, model.centroids), axis=1)
    return model.cluster_anomalous[nearest]


def _kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = [points[rng.integers(n)]]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centroids.append(points[idx])
        d2 = np.minimum(d2, ((points - centroids[-1]) ** 2).sum(axis=1))
    return np.array(centroids)


def _assign(
    points: np.ndarray, centroids: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d2 = _distances_sq(points, centroids)
    assign = np.argmin(d2, axis=1)
    min_d2 = d2[np.arange(points.shape[0]), assign]
    for j in range(centroids.shape[0]):
        if (assign == j).any():
            continue
        # Re-seed an empty cluster on the worst-covered point.
        far = int(np.argmax(min_d2))
        centroids = centroids.copy()
        centroids[j] = points[far]
        d2[:, j] = ((points - points[far]) ** 2).sum(axis=1)
        assign = np.argmin(d2, axis=1)
        min_d2 = d2[np.arange(points.shape[0]), assign]
    return assign, min_d2, centroids


def _means(
    points: np.ndarray, assign: np.ndarray, fallback: np.ndarray
) -> np.ndarray:
    out = fallback.copy()
    for j in range(fallback.shape[0]):
        members = points[assign == j]
        if members.size:
            out[j] = members.mean(axis=0)
    return out


def _distances_sq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _as_mask(labels: Sequence[BinaryLabel] | np.ndarray) -> np.ndarray:
    if isinstance(labels, np.ndarray) and labels.dtype == bool:
        return labels
    return anomalous_mask(labels)
