"""Multilayer perceptrons with explicit reverse-mode gradients.

Layers are affine maps `y = x @ W.T + b` with W shaped (out, in), rectifier
between layers and a linear output unless `activate_output` is set.
Inputs may be a single vector or a (N, in) batch.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from core.exceptions.config import ConfigurationError
from core.exceptions.domain import DimensionMismatch


@dataclass
class Mlp:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activate_output: bool = False

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def dtype(self) -> np.dtype:
        return self.weights[0].dtype

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays in layer order (W0, b0, W1, b1, ...), by reference."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    def astype(self, dtype: np.dtype) -> "Mlp":
        return Mlp(
            weights=[w.astype(dtype) for w in self.weights],
            biases=[b.astype(dtype) for b in self.biases],
            activate_output=self.activate_output,
        )

    def copy(self) -> "Mlp":
        return self.astype(self.dtype)

    def equals(self, other: "Mlp") -> bool:
        return (
            self.dims == other.dims
            and self.activate_output == other.activate_output
            and all(np.array_equal(a, b) for a, b in zip(self.parameters(), other.parameters()))
        )


@dataclass
class ForwardCache:
    inputs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)
    single: bool = False


def init_mlp(
    dims: Sequence[int],
    seed: int,
    activate_output: bool = False,
    dtype: np.dtype = np.float32,
) -> Mlp:
    dims = list(dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ConfigurationError(f"mlp needs at least two positive layer sizes, got {dims}")

    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return Mlp(weights=weights, biases=biases, activate_output=activate_output)


def _is_activated(mlp: Mlp, layer: int) -> bool:
    return layer < len(mlp.weights) - 1 or mlp.activate_output


def forward(mlp: Mlp, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    x = np.asarray(x)
    single = x.ndim == 1
    h = np.atleast_2d(x).astype(mlp.dtype, copy=False)
    if h.ndim != 2 or h.shape[1] != mlp.in_dim:
        raise DimensionMismatch("mlp input size", mlp.in_dim, x.shape[-1] if x.ndim else x.shape)

    cache = ForwardCache(single=single)
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        cache.inputs.append(h)
        pre = h @ w.T + b
        cache.pre.append(pre)
        h = np.maximum(pre, 0) if _is_activated(mlp, layer) else pre

    return (h[0] if single else h), cache


def predict(mlp: Mlp, x: np.ndarray) -> np.ndarray:
    return forward(mlp, x)[0]


def backward(mlp: Mlp, cache: ForwardCache, grad_out: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Gradients of a scalar loss w.r.t. parameters and inputs.

    Returns grads ordered like `mlp.parameters()` and dL/dx shaped like the
    forward input.
    """
    if len(cache.pre) != len(mlp.weights):
        raise DimensionMismatch("forward cache layers", len(mlp.weights), len(cache.pre))

    g = np.atleast_2d(np.asarray(grad_out)).astype(mlp.dtype, copy=False)
    if g.shape != cache.pre[-1].shape:
        raise DimensionMismatch("output gradient shape", cache.pre[-1].shape, g.shape)

    grads: list[np.ndarray] = [None] * (2 * len(mlp.weights))  # type: ignore[list-item]
    for layer in reversed(range(len(mlp.weights))):
        if _is_activated(mlp, layer):
            g = g * (cache.pre[layer] > 0)
        grads[2 * layer] = g.T @ cache.inputs[layer]
        grads[2 * layer + 1] = g.sum(axis=0)
        g = g @ mlp.weights[layer]

    return grads, (g[0] if cache.single else g)
