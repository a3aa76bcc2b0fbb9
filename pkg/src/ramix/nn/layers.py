"""Layers with explicit forward/backward passes.

Activations are float64 arrays. Sequence tensors are channels-last,
``(batch, length, channels)``; dense tensors are ``(batch, features)``.
Each layer caches what its backward pass needs during ``forward``.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericalError, ShapeError
from . import backend

_debug_finite = False


def set_debug(enabled: bool) -> None:
    """Toggle per-op finite-value assertions."""
    global _debug_finite
    _debug_finite = bool(enabled)


def _check(name, arr):
    if _debug_finite and not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite values produced by {name}")
    return arr


def he_uniform(rng, shape, fan_in):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    params: dict
    grads: dict

    def __init__(self):
        self.params = {}
        self.grads = {}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def zero_grad(self):
        for k, v in self.params.items():
            self.grads[k] = np.zeros_like(v)


class Conv1D(Layer):
    """Same-padded, stride-1 1-D convolution (cross-correlation convention).

    ``weight`` has shape (out_channels, in_channels, kernel_size).
    """

    def __init__(self, in_channels, out_channels, kernel_size, rng=None, init="he", kernels=None):
        super().__init__()
        if kernel_size % 2 != 1 or kernel_size < 1:
            raise ValueError(f"kernel_size must be odd, got {kernel_size}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.kernels = kernels
        self.needs_input_grad = True
        rng = rng if rng is not None else np.random.default_rng(0)
        shape = (out_channels, in_channels, kernel_size)
        fan_in = in_channels * kernel_size
        if init == "he":
            w = he_uniform(rng, shape, fan_in)
        else:
            w = glorot_uniform(rng, shape, fan_in, out_channels * kernel_size)
        self.params = {"weight": w, "bias": np.zeros(out_channels)}
        self.zero_grad()
        self._cache = None

    @property
    def _k(self):
        return self.kernels if self.kernels is not None else backend.kernels

    def forward(self, x):
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise ShapeError(f"Conv1D expects (batch, length, {self.in_channels}), got {x.shape}")
        wk = np.ascontiguousarray(self.params["weight"].transpose(0, 2, 1))
        out, cols = self._k.conv1d_forward(np.ascontiguousarray(x, dtype=np.float64), wk, self.params["bias"])
        self._cache = (cols, wk)
        return _check("conv1d", out)

    def backward(self, dout):
        cols, wk = self._cache
        dx, dwk, db = self._k.conv1d_backward(np.ascontiguousarray(dout), cols, wk, self.needs_input_grad)
        self.grads["weight"] = dwk.transpose(0, 2, 1).copy()
        self.grads["bias"] = db
        return None if dx is None else _check("conv1d backward", dx)


class MaxPool1D(Layer):
    """Non-overlapping max-pool; a short trailing window is pooled on its own."""

    def __init__(self, window=2, kernels=None):
        super().__init__()
        if window < 1:
            raise ValueError("pool window must be >= 1")
        self.window = window
        self.kernels = kernels
        self._cache = None

    def output_length(self, length):
        return -(-length // self.window)

    def forward(self, x):
        if x.ndim != 3 or x.shape[1] < 1:
            raise ShapeError(f"MaxPool1D expects a non-empty (batch, length, channels) tensor, got {x.shape}")
        k = self.kernels if self.kernels is not None else backend.kernels
        out, idx = k.maxpool_forward(np.ascontiguousarray(x, dtype=np.float64), self.window)
        self._cache = (idx, x.shape[1], k)
        return out

    def backward(self, dout):
        idx, length, k = self._cache
        return k.maxpool_backward(np.ascontiguousarray(dout), idx, length)


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0.0)


class Sigmoid(Layer):
    def forward(self, x):
        self._out = sigmoid(x)
        return self._out

    def backward(self, dout):
        return dout * self._out * (1.0 - self._out)


class Flatten(Layer):
    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class Dense(Layer):
    """Affine map ``x @ weight + bias`` with weight shape (in_features, out_features)."""

    def __init__(self, in_features, out_features, rng=None, init="he"):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        rng = rng if rng is not None else np.random.default_rng(0)
        shape = (in_features, out_features)
        if init == "he":
            w = he_uniform(rng, shape, in_features)
        else:
            w = glorot_uniform(rng, shape, in_features, out_features)
        self.params = {"weight": w, "bias": np.zeros(out_features)}
        self.zero_grad()

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(f"Dense expects (batch, {self.in_features}), got {x.shape}")
        self._x = x
        return _check("dense", x @ self.params["weight"] + self.params["bias"])

    def backward(self, dout):
        self.grads["weight"] = self._x.T @ dout
        self.grads["bias"] = dout.sum(axis=0)
        return dout @ self.params["weight"].T


class Sequential(Layer):
    def __init__(self, layers):
        super().__init__()
        self.layers = list(layers)

    def named_params(self, prefix=""):
        out = {}
        for i, layer in enumerate(self.layers):
            for k, v in layer.params.items():
                out[f"{prefix}{i}.{k}"] = v
        return out

    def named_grads(self, prefix=""):
        out = {}
        for i, layer in enumerate(self.layers):
            for k, v in layer.grads.items():
                out[f"{prefix}{i}.{k}"] = v
        return out

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dout):
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
            if dout is None:
                break
        return dout


# ---------------------------------------------------------------- functional forms


def sigmoid(x):
    """Logistic function without overflow for large |x|."""
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def relu(x):
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def conv1d_forward(layer: Conv1D, x):
    return layer.forward(x)


def maxpool1d(x, window=2, stride=2):
    """Max-pool a (batch, length, channels) tensor; returns ``(out, argmax_idx)``."""
    if stride != window:
        raise ValueError("only non-overlapping pooling (stride == window) is supported")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[1] == 0:
        raise ShapeError(f"maxpool1d needs a non-empty (batch, length, channels) tensor, got {x.shape}")
    return backend.kernels.maxpool_forward(np.ascontiguousarray(x), window)


def dense_forward(layer: Dense, x):
    return layer.forward(x)
