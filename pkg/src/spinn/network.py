"""Dense ReLU feed-forward networks with hand-derived backprop.

Parameters are kept as plain lists of float64 arrays. Layer ``i`` maps
``dims[i]`` inputs to ``dims[i + 1]`` outputs with ``weights[i]`` of shape
``(dims[i + 1], dims[i])``. Column ``j`` of ``weights[0]`` holds every
outgoing connection of input ``j``; that column is the unit the group
penalties act on.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ACTIVATIONS = ("relu",)


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    hidden_widths: tuple[int, ...] = ()
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if self.input_dim < 0:
            raise ValueError(f"input_dim must be >= 0, got {self.input_dim}")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError(f"hidden widths must be positive, got {self.hidden_widths}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_widths, 1)

    @property
    def n_layers(self) -> int:
        return len(self.hidden_widths) + 1

    def with_input_dim(self, input_dim: int) -> "NetworkConfig":
        return NetworkConfig(input_dim, self.hidden_widths, self.activation)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_widths": list(self.hidden_widths),
            "activation": self.activation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        return cls(int(data["input_dim"]), tuple(data.get("hidden_widths", ())),
                   data.get("activation", "relu"))


@dataclass
class NetworkParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def config(self) -> NetworkConfig:
        dims = [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]
        if dims[-1] != 1:
            raise ValueError("output layer must have width 1")
        return NetworkConfig(dims[0], tuple(dims[1:-1]))

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    def copy(self) -> "NetworkParams":
        return NetworkParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def flatten(self) -> np.ndarray:
        """Concatenate as ``W0, b0, W1, b1, ...`` (row-major weights)."""
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts).astype(np.float64, copy=False)

    @classmethod
    def from_flat(cls, config: NetworkConfig, theta: np.ndarray) -> "NetworkParams":
        dims = config.dims
        weights, biases = [], []
        pos = 0
        for i in range(len(dims) - 1):
            size = dims[i + 1] * dims[i]
            weights.append(np.array(theta[pos:pos + size]).reshape(dims[i + 1], dims[i]))
            pos += size
            biases.append(np.array(theta[pos:pos + dims[i + 1]]))
            pos += dims[i + 1]
        if pos != theta.size:
            raise ValueError(f"flat vector has {theta.size} entries, config needs {pos}")
        return cls(weights, biases)

    def sq_norm(self) -> float:
        """Squared L2 norm over all weights and biases."""
        return float(sum(np.sum(w * w) for w in self.weights) + sum(np.sum(b * b) for b in self.biases))

    def group_norms(self) -> np.ndarray:
        """L2 norm of each input column of the first weight matrix."""
        return np.sqrt(np.sum(self.weights[0] ** 2, axis=0))

    def selected(self) -> np.ndarray:
        """0-based indices of inputs whose column is not exactly zero."""
        return np.flatnonzero(np.any(self.weights[0] != 0.0, axis=0))

    def allclose(self, other: "NetworkParams", **kw) -> bool:
        return all(np.allclose(a, b, **kw) for a, b in
                   zip(self.weights + self.biases, other.weights + other.biases))

    def array_equal(self, other: "NetworkParams") -> bool:
        return len(self.weights) == len(other.weights) and all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.weights + self.biases, other.weights + other.biases))


# Gradients share the parameter layout.
Gradient = NetworkParams


def init_params(config: NetworkConfig, seed: int, std: float = 0.1) -> NetworkParams:
    """Gaussian(0, std^2) weights, zero biases."""
    rng = np.random.default_rng(seed)
    dims = config.dims
    weights = [rng.normal(0.0, std, size=(dims[i + 1], dims[i])) for i in range(len(dims) - 1)]
    biases = [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]
    return NetworkParams(weights, biases)


def _affine(a: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Accumulate input columns left to right, skipping all-zero ones. Every
    # row then sees the same summation order (BLAS does not guarantee that),
    # and a pruned network reproduces its zero-padded parent bit for bit.
    out = np.zeros((a.shape[0], w.shape[0]))
    for k in np.flatnonzero(np.any(w != 0.0, axis=0)):
        out += a[:, k, None] * w[:, k]
    return out + b


def _check_X(params: NetworkParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise ValueError(f"expected input of shape (n, {params.input_dim}), got {X.shape}")
    return X


def _forward_cache(params: NetworkParams, X: np.ndarray):
    acts = [X]
    pre = []
    a = X
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = _affine(a, w, b)
        pre.append(z)
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return pre, acts


def forward_batch(params: NetworkParams, X: np.ndarray) -> np.ndarray:
    X = _check_X(params, X)
    _, acts = _forward_cache(params, X)
    return acts[-1][:, 0]


def forward(params: NetworkParams, x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("forward takes a single input vector")
    return float(forward_batch(params, x[None, :])[0])


def backprop(params: NetworkParams, X: np.ndarray, upstream: np.ndarray) -> Gradient:
    """Gradient of ``sum_i upstream[i] * f(X_i)`` with respect to every parameter.

    ``upstream`` is the per-row derivative of the loss (already carrying any
    1/n factor). The ReLU derivative at exactly 0 is taken as 0.
    """
    X = _check_X(params, X)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (X.shape[0],):
        raise ValueError(f"upstream must have shape ({X.shape[0]},), got {upstream.shape}")
    if not np.all(np.isfinite(upstream)):
        raise ValueError("upstream contains non-finite values")
    pre, acts = _forward_cache(params, X)
    return _backward(params, pre, acts, upstream)


def _backward(params: NetworkParams, pre, acts, upstream: np.ndarray) -> Gradient:
    n_layers = len(params.weights)
    gw: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    delta = upstream[:, None]
    for i in range(n_layers - 1, -1, -1):
        gw[i] = delta.T @ acts[i]
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i]) * (pre[i - 1] > 0.0)
    return NetworkParams(gw, gb)


def prune_inputs(params: NetworkParams, keep: Sequence[int],
                 index_map: Sequence[int] | None = None):
    """Drop the input columns not listed in ``keep`` (0-based).

    Returns ``(params, config, index_map)`` where ``index_map[k]`` is the
    original 0-based variable behind reduced column ``k``. Passing the
    current ``index_map`` composes maps across repeated pruning.
    """
    d = params.input_dim
    keep = np.asarray(sorted(set(int(k) for k in keep)), dtype=np.int64)
    if keep.size and (keep[0] < 0 or keep[-1] >= d):
        raise IndexError(f"keep indices must lie in [0, {d}), got {keep.tolist()}")
    base = np.arange(d) if index_map is None else np.asarray(index_map, dtype=np.int64)
    weights = [params.weights[0][:, keep].copy()] + [w.copy() for w in params.weights[1:]]
    new = NetworkParams(weights, [b.copy() for b in params.biases])
    return new, new.config, base[keep]


def embed_inputs(params: NetworkParams, index_map: Sequence[int], input_dim: int) -> NetworkParams:
    """Inverse of :func:`prune_inputs`: scatter columns back into ``input_dim`` slots."""
    w0 = np.zeros((params.weights[0].shape[0], input_dim))
    w0[:, np.asarray(index_map, dtype=np.int64)] = params.weights[0]
    return NetworkParams([w0] + [w.copy() for w in params.weights[1:]],
                         [b.copy() for b in params.biases])


@dataclass
class Model:
    """A network together with the original variables feeding its inputs."""

    params: NetworkParams
    index_map: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    activation: str = "relu"

    def predict(self, X_full: np.ndarray) -> np.ndarray:
        X_full = np.asarray(X_full, dtype=np.float64)
        return forward_batch(self.params, X_full[:, self.index_map])

    @classmethod
    def from_full(cls, params: NetworkParams) -> "Model":
        """Keep only the selected inputs of a full-width network."""
        reduced, _, index_map = prune_inputs(params, params.selected())
        return cls(reduced, index_map)

    def to_dict(self) -> dict:
        config = self.params.config
        return {
            "config": {**config.to_dict(), "activation": self.activation},
            "weights": [w.tolist() for w in self.params.weights],
            "biases": [b.tolist() for b in self.params.biases],
            "index_map": [int(j) + 1 for j in self.index_map],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Model":
        config = NetworkConfig.from_dict(data["config"])
        dims = config.dims
        weights = []
        for i, w in enumerate(data["weights"]):
            arr = np.array(w, dtype=np.float64).reshape(dims[i + 1], dims[i])
            weights.append(arr)
        biases = [np.array(b, dtype=np.float64).reshape(-1) for b in data["biases"]]
        if len(weights) != config.n_layers or len(biases) != config.n_layers:
            raise ValueError("layer count does not match config")
        for i, b in enumerate(biases):
            if b.shape != (dims[i + 1],):
                raise ValueError(f"bias {i} has shape {b.shape}, expected ({dims[i + 1]},)")
        index_map = np.array(data.get("index_map", []), dtype=np.int64) - 1
        if index_map.size != config.input_dim:
            raise ValueError(f"index_map has {index_map.size} entries for input_dim {config.input_dim}")
        if index_map.size and index_map.min() < 0:
            raise ValueError("index_map entries are 1-based")
        return cls(NetworkParams(weights, biases), index_map, config.activation)

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "Model":
        return cls.from_dict(json.loads(text))
