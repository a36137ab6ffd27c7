"""Soft-margin SVM with an RBF kernel, trained by sequential minimal optimization.

The optimizer picks violating pairs with the usual heuristics (worst error
difference first, then seeded random sweeps), keeps a full error cache that
is updated incrementally after every successful pair step, and computes
kernel rows on demand through a small LRU cache so the full kernel matrix is
never materialized. Labels are mapped normal -> -1, anomalous -> +1; a
decision value of exactly zero is classified anomalous.
"""

from __future__ import annotations

import warnings
from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dataset import BinaryLabel, anomalous_mask

_STEP_EPS = 1e-10


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray  # alpha_i * y_i, only alpha_i > 0 kept
    bias: float
    gamma: float
    c: float
    converged: bool


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> float:
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.exp(-gamma * diff @ diff))


def resolve_gamma(points: np.ndarray, gamma: float | str) -> float:
    """Numeric gamma, or the variance-scaled heuristic 1 / (d * Var(X))."""
    if isinstance(gamma, str):
        if gamma != "scale":
            raise ValueError(f"unknown gamma setting {gamma!r}")
        variance = float(points.var())
        return 1.0 / (points.shape[1] * variance) if variance > 0 else 1.0
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return float(gamma)


def fit_svm(
    points: np.ndarray,
    labels: Sequence[BinaryLabel] | np.ndarray,
    c: float = 1.0,
    gamma: float | str = "scale",
    tol: float = 1e-3,
    max_passes: int = 1000,
    seed: int = 0,
    cache_rows: int = 256,
) -> SvmModel:
    """Solve the dual problem by SMO; returns the support-vector expansion.

    ``max_passes`` caps the number of outer sweeps; if it is exhausted the
    best iterate so far is returned with ``converged=False`` and a warning.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mask = _as_mask(labels)
    if points.shape[0] != mask.shape[0]:
        raise ValueError("points and labels have different lengths")
    if mask.all() or not mask.any():
        raise ValueError("training data must contain both classes")
    if c <= 0:
        raise ValueError(f"penalty c must be > 0, got {c}")
    gamma = resolve_gamma(points, gamma)
    m = points.shape[0]
    y = np.where(mask, 1.0, -1.0)
    alphas = np.zeros(m)
    errors = -y.copy()  # decision function starts at 0, so E_i = -y_i
    bias = 0.0
    nonbound = np.zeros(m, dtype=bool)
    rng = np.random.default_rng(seed)
    cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def kernel_row(i: int) -> np.ndarray:
        row = cache.get(i)
        if row is None:
            diff = points - points[i]
            row = np.exp(-gamma * np.einsum("ij,ij->i", diff, diff))
            cache[i] = row
            if len(cache) > cache_rows:
                cache.popitem(last=False)
        else:
            cache.move_to_end(i)
        return row

    def kernel_pair(i: int, j: int) -> float:
        diff = points[i] - points[j]
        return float(np.exp(-gamma * (diff @ diff)))

    def take_step(i1: int, i2: int) -> bool:
        nonlocal bias
        if i1 == i2:
            return False
        a1, a2 = alphas[i1], alphas[i2]
        y1, y2 = y[i1], y[i2]
        e1, e2 = errors[i1], errors[i2]
        s = y1 * y2
        if s > 0:
            low, high = max(0.0, a1 + a2 - c), min(c, a1 + a2)
        else:
            low, high = max(0.0, a2 - a1), min(c, c + a2 - a1)
        if low == high:
            return False
        k12 = kernel_pair(i1, i2)
        eta = 2.0 - 2.0 * k12  # k11 = k22 = 1 for the RBF kernel
        if eta > 0:
            a2new = np.clip(a2 + y2 * (e1 - e2) / eta, low, high)
        else:
            # Duplicate inputs: compare the dual objective at both clip ends.
            v1 = (e1 + y1) - bias - y1 * a1 - y2 * a2 * k12
            v2 = (e2 + y2) - bias - y1 * a1 * k12 - y2 * a2
            joint = a1 + s * a2

            def dual_at(a2c: float) -> float:
                a1c = joint - s * a2c
                return (
                    a1c
                    + a2c
                    - 0.5 * a1c * a1c
                    - 0.5 * a2c * a2c
                    - s * a1c * a2c * k12
                    - y1 * a1c * v1
                    - y2 * a2c * v2
                )

            low_obj, high_obj = dual_at(low), dual_at(high)
            if low_obj > high_obj + _STEP_EPS:
                a2new = low
            elif high_obj > low_obj + _STEP_EPS:
                a2new = high
            else:
                return False
        if abs(a2new - a2) < _STEP_EPS * (a2new + a2 + _STEP_EPS):
            return False
        a1new = float(np.clip(a1 + s * (a2 - a2new), 0.0, c))
        d1 = y1 * (a1new - a1)
        d2 = y2 * (a2new - a2)
        b1 = bias - e1 - d1 - d2 * k12
        b2 = bias - e2 - d1 * k12 - d2
        if 0.0 < a1new < c:
            bnew = b1
        elif 0.0 < a2new < c:
            bnew = b2
        else:
            bnew = 0.5 * (b1 + b2)
        errors += d1 * kernel_row(i1) + d2 * kernel_row(i2) + (bnew - bias)
        alphas[i1], alphas[i2] = a1new, a2new
        nonbound[i1] = 0.0 < a1new < c
        nonbound[i2] = 0.0 < a2new < c
        bias = bnew
        return True

    def examine(i2: int) -> int:
        y2, a2, e2 = y[i2], alphas[i2], errors[i2]
        r2 = e2 * y2
        if not ((r2 < -tol and a2 < c) or (r2 > tol and a2 > 0)):
            return 0
        candidates = np.flatnonzero(nonbound)
        if candidates.size > 1:
            i1 = int(candidates[np.argmax(np.abs(errors[candidates] - e2))])
            if take_step(i1, i2):
                return 1
        if candidates.size:
            offset = int(rng.integers(candidates.size))
            for j in range(candidates.size):
                if take_step(int(candidates[(offset + j) % candidates.size]), i2):
                    return 1
        offset = int(rng.integers(m))
        for j in range(m):
            if take_step((offset + j) % m, i2):
                return 1
        return 0

    examine_all = True
    num_changed = 0
    sweeps = 0
    converged = True
    while num_changed > 0 or examine_all:
        if sweeps >= max_passes:
            converged = False
            warnings.warn(
                f"SMO stopped after {max_passes} sweeps without full "
                "convergence; returning the best iterate",
                stacklevel=2,
            )
            break
        sweeps += 1
        num_changed = 0
        if examine_all:
            for i in range(m):
                num_changed += examine(i)
            examine_all = False
        else:
            for i in np.flatnonzero(nonbound):
                num_changed += examine(int(i))
            if num_changed == 0:
                examine_all = True

    keep = alphas > 0
    return SvmModel(
        support_vectors=points[keep].copy(),
        dual_coefs=(alphas * y)[keep],
        bias=float(bias),
        gamma=gamma,
        c=float(c),
        converged=converged,
    )


def decision_function(
    model: SvmModel, queries: np.ndarray, chunk_size: int = 2048
) -> np.ndarray:
    """Signed distance surrogate: sum of dual coefficients times kernel, plus bias."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if queries.shape[1] != model.support_vectors.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries have {queries.shape[1]}, "
            f"support vectors have {model.support_vectors.shape[1]}"
        )
    sv = model.support_vectors
    sv_norms = np.einsum("ij,ij->i", sv, sv)
    out = np.empty(queries.shape[0])
    for start in range(0, queries.shape[0], chunk_size):
        chunk = queries[start : start + chunk_size]
        d2 = (
            sv_norms[None, :]
            + np.einsum("ij,ij->i", chunk, chunk)[:, None]
            - 2.0 * chunk @ sv.T
        )
        np.maximum(d2, 0.0, out=d2)
        out[start : start + chunk.shape[0]] = (
            np.exp(-model.gamma * d2) @ model.dual_coefs + model.bias
        )
    return out


def predict_svm(model: SvmModel, x: np.ndarray) -> BinaryLabel:
    mask = predict_svm_batch(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return BinaryLabel.ANOMALOUS if mask[0] else BinaryLabel.NORMAL


def predict_svm_batch(model: SvmModel, queries: np.ndarray) -> np.ndarray:
    """Boolean anomalous mask; the zero decision boundary counts as anomalous."""
    return decision_function(model, queries) >= 0.0


def _as_mask(labels: Sequence[BinaryLabel] | np.ndarray) -> np.ndarray:
    if isinstance(labels, np.ndarray) and labels.dtype == bool:
        return labels
    return anomalous_mask(labels)
