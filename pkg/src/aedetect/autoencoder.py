"""Dense feed-forward autoencoder trained by backpropagation with Adam.

The production topology is input, 32, 16, 32, input with ReLU on every
layer including the output; inputs are MinMax-scaled to [0, 1] so the
non-negative output range is benign. Loss is the mean squared error averaged
over dimensions and over the batch, which keeps the reconstruction error on
the same scale regardless of input width.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TrainingDivergedError

HIDDEN_SIZES: tuple[int, ...] = (32, 16, 32)


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 256
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass
class AutoencoderModel:
    """Per-layer weight matrices (out x in) and bias vectors, ReLU throughout."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def bottleneck_index(self) -> int:
        # Middle of a symmetric chain: activations[1] for the 4-stage topology.
        return len(self.weights) // 2 - 1

    @property
    def bottleneck_dim(self) -> int:
        return self.weights[self.bottleneck_index].shape[0]


@dataclass
class ForwardTrace:
    """Intermediate values of one forward pass, kept for the backward pass."""

    x: np.ndarray
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]

    @property
    def reconstruction(self) -> np.ndarray:
        return self.activations[-1]

    def bottleneck(self, model: AutoencoderModel) -> np.ndarray:
        return self.activations[model.bottleneck_index]


@dataclass
class AdamState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step: int = 0


def build_model(layer_sizes: Sequence[int], seed: int) -> AutoencoderModel:
    """Glorot-uniform weights and zero biases for an arbitrary layer chain."""
    if len(layer_sizes) < 2:
        raise ValueError("need at least an input and an output layer")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return AutoencoderModel(weights=weights, biases=biases)


def init_model(n: int, seed: int) -> AutoencoderModel:
    """The production topology; the input must be wider than the hidden layers."""
    widest_hidden = max(HIDDEN_SIZES)
    if n <= widest_hidden:
        raise ValueError(
            f"input dimension must exceed the widest hidden layer "
            f"({widest_hidden}), got {n}"
        )
    return build_model([n, *HIDDEN_SIZES, n], seed)


def _forward_arrays(
    model: AutoencoderModel, x: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    pre_activations = []
    activations = []
    a = x
    for w, b in zip(model.weights, model.biases):
        z = a @ w.T + b
        a = np.maximum(z, 0.0)
        pre_activations.append(z)
        activations.append(a)
    return pre_activations, activations


def forward(model: AutoencoderModel, x: np.ndarray) -> ForwardTrace:
    """Affine + ReLU composition; the trace retains every intermediate value."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.input_dim:
        raise ValueError(
            f"dimension mismatch: input has {x.shape[-1]}, model expects "
            f"{model.input_dim}"
        )
    pre, act = _forward_arrays(model, x)
    return ForwardTrace(x=x, pre_activations=pre, activations=act)


def mse_loss(x: np.ndarray, xhat: np.ndarray) -> float:
    """Mean over dimensions of the squared reconstruction error."""
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if x.shape != xhat.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {xhat.shape}")
    return float(np.mean((x - xhat) ** 2))


def backward(
    model: AutoencoderModel, trace: ForwardTrace, x: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact gradients of the mean-squared loss for every weight and bias.

    ``x`` must be the array the trace was produced from. For a batch trace
    the loss is additionally averaged over the batch. The ReLU subgradient
    at exactly zero is taken as zero.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != trace.x.shape or not np.array_equal(x, trace.x):
        raise ValueError("trace does not correspond to this input")
    x2d = np.atleast_2d(x)
    batch, dim = x2d.shape
    grad_w = []
    grad_b = []
    delta = 2.0 * (np.atleast_2d(trace.reconstruction) - x2d) / (batch * dim)
    for layer in reversed(range(len(model.weights))):
        z = np.atleast_2d(trace.pre_activations[layer])
        delta = delta * (z > 0.0)
        a_prev = (
            np.atleast_2d(trace.activations[layer - 1]) if layer > 0 else x2d
        )
        grad_w.append(delta.T @ a_prev)
        grad_b.append(delta.sum(axis=0))
        if layer > 0:
            delta = delta @ model.weights[layer]
    grad_w.reverse()
    grad_b.reverse()
    return grad_w, grad_b


def init_adam_state(model: AutoencoderModel) -> AdamState:
    return AdamState(
        m_w=[np.zeros_like(w) for w in model.weights],
        v_w=[np.zeros_like(w) for w in model.weights],
        m_b=[np.zeros_like(b) for b in model.biases],
        v_b=[np.zeros_like(b) for b in model.biases],
    )


def adam_step(
    model: AutoencoderModel,
    gradients: tuple[list[np.ndarray], list[np.ndarray]],
    state: AdamState,
    config: TrainConfig,
) -> tuple[AutoencoderModel, AdamState]:
    """One bias-corrected Adam update; parameters are updated in place."""
    grad_w, grad_b = gradients
    state.step += 1
    t = state.step
    scale_m = 1.0 - config.beta1**t
    scale_v = 1.0 - config.beta2**t
    for params, grads, ms, vs in (
        (model.weights, grad_w, state.m_w, state.v_w),
        (model.biases, grad_b, state.m_b, state.v_b),
    ):
        for p, g, m, v in zip(params, grads, ms, vs):
            m *= config.beta1
            m += (1.0 - config.beta1) * g
            v *= config.beta2
            v += (1.0 - config.beta2) * g**2
            p -= config.learning_rate * (m / scale_m) / (
                np.sqrt(v / scale_v) + config.epsilon
            )
    return model, state


def train(
    model: AutoencoderModel, data: np.ndarray, config: TrainConfig
) -> tuple[AutoencoderModel, list[float]]:
    """Mini-batch training with seeded shuffling; returns per-epoch mean loss."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("training data must be a non-empty (n, dim) array")
    if data.shape[1] != model.input_dim:
        raise ValueError(
            f"dimension mismatch: data has {data.shape[1]}, model expects "
            f"{model.input_dim}"
        )
    rng = np.random.default_rng(config.seed)
    state = init_adam_state(model)
    n = data.shape[0]
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            batch = data[batch_idx]
            trace = forward(model, batch)
            loss = mse_loss(batch, trace.reconstruction)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch + 1}, "
                    f"batch starting at sample {start}"
                )
            gradients = backward(model, trace, batch)
            adam_step(model, gradients, state, config)
            total += loss * batch.shape[0]
        history.append(total / n)
    return model, history
