"""A small fully-connected autoencoder used as a self-supervised embedder.

Hidden layers (including the bottleneck) use the configured activation; the
output layer is linear. Everything is plain numpy with hand-written backprop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from divbalance.errors import ConfigError, ShapeError, TrainingError

ACTIVATIONS = ("tanh", "relu", "identity")


def _act(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _act_grad(name, z, a):
    # derivative w.r.t. the pre-activation, given pre-activation z and output a
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (z > 0).astype(z.dtype)
    return np.ones_like(z)


def check_layer_dims(layer_dims) -> int:
    """Validate an autoencoder shape and return the bottleneck index."""
    dims = list(layer_dims)
    if len(dims) < 3 or len(dims) % 2 == 0:
        raise ConfigError("layer_dims", f"need an odd number (>= 3) of layers, got {dims}")
    if any(not isinstance(d, (int, np.integer)) or d < 1 for d in dims):
        raise ConfigError("layer_dims", f"all sizes must be positive integers, got {dims}")
    if dims != dims[::-1]:
        raise ConfigError("layer_dims", f"must be symmetric about the bottleneck, got {dims}")
    mid = len(dims) // 2
    if dims[mid] > min(dims):
        raise ConfigError("layer_dims", f"bottleneck {dims[mid]} is not the narrowest layer in {dims}")
    return mid


@dataclass
class EmbedderParams:
    layer_dims: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activation: str = "tanh"
    bottleneck_index: int = field(default=-1)

    def __post_init__(self):
        self.layer_dims = [int(d) for d in self.layer_dims]
        mid = check_layer_dims(self.layer_dims)
        if self.bottleneck_index == -1:
            self.bottleneck_index = mid
        if self.bottleneck_index != mid:
            raise ConfigError("bottleneck_index", f"expected {mid}, got {self.bottleneck_index}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError("activation", f"must be one of {ACTIVATIONS}, got {self.activation!r}")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise ShapeError(f"expected {len(self.layer_dims) - 1} weight/bias pairs")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.layer_dims[l + 1], self.layer_dims[l])
            if w.shape != want:
                raise ShapeError(f"weights[{l}] has shape {w.shape}, expected {want}")
            if b.shape != (want[0],):
                raise ShapeError(f"biases[{l}] has shape {b.shape}, expected {(want[0],)}")

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def embedding_dim(self) -> int:
        return self.layer_dims[self.bottleneck_index]

    def copy(self) -> "EmbedderParams":
        return EmbedderParams(
            list(self.layer_dims),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
            self.bottleneck_index,
        )

    def __eq__(self, other):
        if not isinstance(other, EmbedderParams):
            return NotImplemented
        return (
            self.layer_dims == other.layer_dims
            and self.activation == other.activation
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
        )


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-2
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_init_scale: float = 1.0
    seed: int = 0
    shuffle: bool = True

    def validate(self):
        if not isinstance(self.epochs, (int, np.integer)) or self.epochs < 0:
            raise ConfigError("epochs", f"must be a non-negative integer, got {self.epochs!r}")
        if not isinstance(self.batch_size, (int, np.integer)) or self.batch_size < 1:
            raise ConfigError("batch_size", f"must be a positive integer, got {self.batch_size!r}")
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate", f"must be >= 0, got {self.learning_rate!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError("optimizer", f"must be 'sgd' or 'adam', got {self.optimizer!r}")
        if not self.weight_init_scale > 0:
            raise ConfigError("weight_init_scale", f"must be > 0, got {self.weight_init_scale!r}")


def init_embedder(layer_dims, activation: str = "tanh", seed: int = 0, scale: float = 1.0) -> EmbedderParams:
    """Uniform(-scale/sqrt(fan_in), scale/sqrt(fan_in)) weights, zero biases."""
    check_layer_dims(layer_dims)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        bound = scale / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return EmbedderParams(list(layer_dims), weights, biases, activation)


def _as_input(params: EmbedderParams, data) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1 and x.size == 0:
        x = x.reshape(0, params.input_dim)
    if x.ndim != 2 or x.shape[1] != params.input_dim:
        raise ShapeError(f"data has shape {x.shape}, embedder expects (n, {params.input_dim})")
    return x


def _forward(params: EmbedderParams, x: np.ndarray, stop: int):
    """Run layers [0, stop); returns (pre-activations, activations) lists."""
    last = len(params.weights) - 1
    zs, acts = [], [x]
    a = x
    for l in range(stop):
        z = a @ params.weights[l].T + params.biases[l]
        a = z if l == last else _act(params.activation, z)
        zs.append(z)
        acts.append(a)
    return zs, acts


def encode(params: EmbedderParams, data) -> np.ndarray:
    x = _as_input(params, data)
    return _forward(params, x, params.bottleneck_index)[1][-1]


def reconstruct(params: EmbedderParams, data) -> np.ndarray:
    x = _as_input(params, data)
    return _forward(params, x, len(params.weights))[1][-1]


def mse_loss(x, x_hat) -> float:
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {x_hat.shape}")
    if x.size == 0:
        raise ShapeError("mse of empty arrays is undefined")
    return float(np.mean((x - x_hat) ** 2))


def gradient(params: EmbedderParams, batch) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Analytic gradient of ``mse_loss(reconstruct(params, batch), batch)``.

    Returns ``(weight_grads, bias_grads)`` shaped like the parameters.
    """
    x = _as_input(params, batch)
    if x.shape[0] == 0:
        raise ShapeError("gradient needs a nonempty batch")
    zs, acts = _forward(params, x, len(params.weights))
    # d(mean over n*m entries)/d(output)
    delta = 2.0 * (acts[-1] - x) / x.size
    last = len(params.weights) - 1
    grad_w = [None] * len(params.weights)
    grad_b = [None] * len(params.weights)
    for l in range(last, -1, -1):
        if l != last:
            delta = delta * _act_grad(params.activation, zs[l], acts[l + 1])
        grad_w[l] = delta.T @ acts[l]
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = delta @ params.weights[l]
    return grad_w, grad_b


def train_autoencoder(params: EmbedderParams, data, config: TrainConfig):
    """Mini-batch gradient descent on reconstruction MSE.

    Returns ``(new_params, loss_trace)`` where ``loss_trace[e]`` is the
    full-data reconstruction loss after epoch ``e``. The input params are
    not modified.
    """
    config.validate()
    x = _as_input(params, data)
    if x.shape[0] == 0:
        raise ShapeError("cannot train on an empty dataset")
    params = params.copy()
    n = x.shape[0]
    rng = np.random.default_rng(config.seed)
    lr = config.learning_rate
    tensors = params.weights + params.biases
    m1 = [np.zeros_like(t) for t in tensors]
    m2 = [np.zeros_like(t) for t in tensors]
    step = 0
    trace = []
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        for start in range(0, n, config.batch_size):
            batch = x[order[start:start + config.batch_size]]
            gw, gb = gradient(params, batch)
            grads = gw + gb
            step += 1
            for t, g, a, b in zip(tensors, grads, m1, m2):
                if config.optimizer == "sgd":
                    t -= lr * g
                    continue
                a *= config.beta1
                a += (1.0 - config.beta1) * g
                b *= config.beta2
                b += (1.0 - config.beta2) * g * g
                a_hat = a / (1.0 - config.beta1**step)
                b_hat = b / (1.0 - config.beta2**step)
                t -= lr * a_hat / (np.sqrt(b_hat) + config.eps)
        loss = mse_loss(x, reconstruct(params, x))
        if not np.isfinite(loss):
            raise TrainingError(epoch, loss)
        trace.append(loss)
    return params, trace
