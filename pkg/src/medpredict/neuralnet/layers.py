"""Layers for a small NHWC float64 network engine.

Forward passes cache whatever their backward pass needs; backward returns
the gradient with respect to the layer input and stores parameter
gradients on the layer. Convolution is cross-correlation (no kernel flip).
"""

from __future__ import annotations

import math

import numpy as np


def _as_f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


# ------------------------------------------------------------- functional


def _same_padding(extent: int, kernel: int, stride: int) -> tuple[int, int]:
    out = math.ceil(extent / stride)
    total = max((out - 1) * stride + kernel - extent, 0)
    lo = total // 2
    return lo, total - lo


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int):
    windows = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(1, 2))
    windows = windows[:, ::stride, ::stride]  # (N, Ho, Wo, C, kh, kw)
    n, ho, wo, c = windows.shape[:4]
    cols = windows.transpose(0, 1, 2, 4, 5, 3).reshape(n * ho * wo, kh * kw * c)
    return cols, ho, wo


def conv2d_forward(x, weights, bias, stride: int = 1, padding: str = "valid"):
    """Cross-correlate NHWC input with (kh, kw, c_in, c_out) weights.

    'same' zero-pads so H and W are preserved at stride 1. Returns the
    output tensor plus the cache consumed by conv2d_backward.
    """
    x, weights, bias = _as_f64(x), _as_f64(weights), _as_f64(bias)
    if x.ndim != 4:
        raise ValueError(f"conv2d expects NHWC input, got shape {x.shape}")
    kh, kw, c_in, c_out = weights.shape
    if x.shape[3] != c_in:
        raise ValueError(f"input has {x.shape[3]} channels but weights expect {c_in}")
    if bias.shape != (c_out,):
        raise ValueError(f"bias shape {bias.shape} does not match {c_out} filters")
    if padding == "same":
        ph = _same_padding(x.shape[1], kh, stride)
        pw = _same_padding(x.shape[2], kw, stride)
    elif padding == "valid":
        ph = pw = (0, 0)
        if x.shape[1] < kh or x.shape[2] < kw:
            raise ValueError(f"kernel {kh}x{kw} larger than input {x.shape[1]}x{x.shape[2]}")
    else:
        raise ValueError(f"padding must be 'valid' or 'same', got {padding!r}")
    xp = np.pad(x, ((0, 0), ph, pw, (0, 0)))
    cols, ho, wo = _im2col(xp, kh, kw, stride)
    out = cols @ weights.reshape(kh * kw * c_in, c_out) + bias
    out = out.reshape(x.shape[0], ho, wo, c_out)
    cache = (cols, xp.shape, x.shape, (ph, pw), stride, weights.shape)
    return out, cache


def conv2d_backward(grad, weights, cache):
    """Gradients w.r.t. input, weights and bias from the forward cache."""
    grad = _as_f64(grad)
    cols, xp_shape, x_shape, (ph, pw), stride, wshape = cache
    kh, kw, c_in, c_out = wshape
    n, ho, wo = grad.shape[0], grad.shape[1], grad.shape[2]
    grad_flat = grad.reshape(n * ho * wo, c_out)
    grad_w = (cols.T @ grad_flat).reshape(kh, kw, c_in, c_out)
    grad_b = grad_flat.sum(axis=0)
    grad_wins = (grad_flat @ weights.reshape(kh * kw * c_in, c_out).T).reshape(n, ho, wo, kh, kw, c_in)
    grad_xp = np.zeros(xp_shape)
    for i in range(kh):
        for j in range(kw):
            grad_xp[:, i : i + ho * stride : stride, j : j + wo * stride : stride, :] += grad_wins[:, :, :, i, j, :]
    grad_x = grad_xp[:, ph[0] : ph[0] + x_shape[1], pw[0] : pw[0] + x_shape[2], :]
    return grad_x, grad_w, grad_b


def maxpool2d_forward(x, window: int, stride: int):
    """Per-window max over NHWC input; output extent floor((H-w)/s)+1.

    Returns (output, argmax indices); the indices drive the backward
    routing.
    """
    x = _as_f64(x)
    if x.ndim != 4:
        raise ValueError(f"maxpool expects NHWC input, got shape {x.shape}")
    if x.shape[1] < window or x.shape[2] < window:
        raise ValueError(f"window {window} larger than input {x.shape[1]}x{x.shape[2]}")
    windows = np.lib.stride_tricks.sliding_window_view(x, (window, window), axis=(1, 2))
    windows = windows[:, ::stride, ::stride]  # (N, Ho, Wo, C, w, w)
    flat = windows.reshape(*windows.shape[:4], window * window)
    arg = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]
    return out, arg


def maxpool2d_backward(grad, arg, input_shape, window: int, stride: int):
    """Scatter the upstream gradient back to each window's argmax cell."""
    grad = _as_f64(grad)
    n, ho, wo, c = arg.shape
    nn, hh, ww, cc = np.indices((n, ho, wo, c))
    ii = hh * stride + arg // window
    jj = ww * stride + arg % window
    grad_x = np.zeros(input_shape)
    np.add.at(grad_x, (nn, ii, jj, cc), grad)
    return grad_x


def dense_forward(x, weights, bias):
    """Affine map: (N, D) @ (D, M) + (M,)."""
    x, weights, bias = _as_f64(x), _as_f64(weights), _as_f64(bias)
    if x.ndim != 2:
        raise ValueError(f"dense expects (N, D) input, got shape {x.shape}")
    if x.shape[1] != weights.shape[0]:
        raise ValueError(f"input width {x.shape[1]} does not match weights {weights.shape}")
    if bias.shape != (weights.shape[1],):
        raise ValueError(f"bias shape {bias.shape} does not match weights {weights.shape}")
    return x @ weights + bias


def dropout_forward(x, rate: float, mode: str, rng: np.random.Generator):
    """Inverted dropout.

    Eval mode is the identity. Train mode zeroes each element with
    probability `rate` and scales survivors by 1/(1-rate); returns
    (output, mask) with the mask reused by the backward pass.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    x = _as_f64(x)
    if mode == "eval":
        return x, None
    mask = rng.random(x.shape) >= rate
    return x * mask / (1.0 - rate), mask


def softmax(logits):
    z = _as_f64(logits)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, one_hot_targets):
    """Mean cross-entropy of softmax(logits) against one-hot rows.

    Numerically stable (row max subtracted). Returns (loss, gradient)
    with gradient = (softmax - target) / N.
    """
    logits = _as_f64(logits)
    targets = _as_f64(one_hot_targets)
    if logits.shape != targets.shape:
        raise ValueError(f"logits {logits.shape} and targets {targets.shape} differ")
    if logits.ndim != 2:
        raise ValueError("softmax_cross_entropy expects (N, K) inputs")
    if not (np.all((targets == 0.0) | (targets == 1.0)) and np.all(targets.sum(axis=1) == 1.0)):
        raise ValueError("each target row must be one-hot")
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_norm - (shifted * targets).sum(axis=1)))
    grad = (softmax(logits) - targets) / n
    return loss, grad


# ----------------------------------------------------------------- layers


class Layer:
    """Base layer: forward caches, backward consumes the cache once."""

    def forward(self, x, train: bool):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    @property
    def params(self) -> list:
        return []

    @property
    def grads(self) -> list:
        return []

    def _need_cache(self, cache):
        if cache is None:
            raise RuntimeError(f"{type(self).__name__}.backward called without a preceding forward pass")
        return cache


class Conv2D(Layer):
    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding="same", rng=None):
        if out_channels < 1 or kernel_size < 1 or stride < 1:
            raise ValueError("conv parameters must be positive")
        rng = rng if rng is not None else np.random.default_rng(0)
        fan_in = kernel_size * kernel_size * in_channels
        self.weights = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(kernel_size, kernel_size, in_channels, out_channels))
        self.bias = np.zeros(out_channels)
        self.stride = stride
        self.padding = padding
        self.grad_weights = np.zeros_like(self.weights)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    def forward(self, x, train):
        out, self._cache = conv2d_forward(x, self.weights, self.bias, self.stride, self.padding)
        return out

    def backward(self, grad):
        cache = self._need_cache(self._cache)
        grad_x, self.grad_weights, self.grad_bias = conv2d_backward(grad, self.weights, cache)
        self._cache = None
        return grad_x

    @property
    def params(self):
        return [self.weights, self.bias]

    @property
    def grads(self):
        return [self.grad_weights, self.grad_bias]


class MaxPool2D(Layer):
    def __init__(self, window=2, stride=None):
        if window < 1:
            raise ValueError("window must be positive")
        self.window = window
        self.stride = stride if stride is not None else window
        self._cache = None

    def forward(self, x, train):
        out, arg = maxpool2d_forward(x, self.window, self.stride)
        self._cache = (arg, x.shape)
        return out

    def backward(self, grad):
        arg, shape = self._need_cache(self._cache)
        self._cache = None
        return maxpool2d_backward(grad, arg, shape, self.window, self.stride)


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x, train):
        x = _as_f64(x)
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad):
        mask = self._need_cache(self._mask)
        self._mask = None
        return grad * mask


class Flatten(Layer):
    def __init__(self):
        self._shape = None

    def forward(self, x, train):
        x = _as_f64(x)
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        shape = self._need_cache(self._shape)
        self._shape = None
        return grad.reshape(shape)


class Dense(Layer):
    def __init__(self, in_features, out_features, rng=None):
        if in_features < 1 or out_features < 1:
            raise ValueError("dense dimensions must be positive")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights = rng.normal(0.0, math.sqrt(2.0 / in_features), size=(in_features, out_features))
        self.bias = np.zeros(out_features)
        self.grad_weights = np.zeros_like(self.weights)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    def forward(self, x, train):
        out = dense_forward(x, self.weights, self.bias)
        self._cache = _as_f64(x)
        return out

    def backward(self, grad):
        x = self._need_cache(self._cache)
        self._cache = None
        grad = _as_f64(grad)
        if grad.shape[1] != self.weights.shape[1]:
            raise ValueError(f"gradient width {grad.shape[1]} does not match weights {self.weights.shape}")
        self.grad_weights = x.T @ grad
        self.grad_bias = grad.sum(axis=0)
        return grad @ self.weights.T

    @property
    def params(self):
        return [self.weights, self.bias]

    @property
    def grads(self):
        return [self.grad_weights, self.grad_bias]


class Dropout(Layer):
    def __init__(self, rate, rng=None):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._mask = None

    def forward(self, x, train):
        out, mask = dropout_forward(x, self.rate, "train" if train else "eval", self.rng)
        self._mask = mask if train else True  # eval backward is the identity
        return out

    def backward(self, grad):
        mask = self._need_cache(self._mask)
        self._mask = None
        if mask is True:
            return grad
        return grad * mask / (1.0 - self.rate)


class Softmax(Layer):
    """Probability head. Training fuses this with the cross-entropy loss;
    the layer itself serves eval-time probability output."""

    def __init__(self):
        self._out = None

    def forward(self, x, train):
        self._out = softmax(x)
        return self._out

    def backward(self, grad):
        s = self._need_cache(self._out)
        self._out = None
        inner = (grad * s).sum(axis=-1, keepdims=True)
        return s * (grad - inner)
