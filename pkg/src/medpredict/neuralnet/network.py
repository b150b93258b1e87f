"""Sequential network container, backprop driver and SGD training loop."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .layers import Layer, Softmax, softmax_cross_entropy


@dataclass(frozen=True)
class SGDConfig:
    learning_rate: float
    batch_size: int = 32
    epochs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


class SequentialNet:
    """Ordered layer stack with a train/eval mode switch.

    `input_shape` records the (H, W, C) or (D,) the net was built for so
    callers can validate inputs before a forward pass.
    """

    def __init__(self, layers: list[Layer], input_shape=None):
        self.layers = list(layers)
        self.mode = "train"
        self.input_shape = tuple(input_shape) if input_shape is not None else None
        self._trace: list[Layer] = []

    def set_mode(self, mode: str):
        if mode not in ("train", "eval"):
            raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
        self.mode = mode

    def forward(self, x, train: bool | None = None):
        """Full forward pass through every layer."""
        return self._run(self.layers, x, train)

    def forward_logits(self, x, train: bool | None = None):
        """Forward pass that stops before a trailing Softmax, for use with
        the fused softmax cross-entropy loss."""
        layers = self.layers
        if layers and isinstance(layers[-1], Softmax):
            layers = layers[:-1]
        return self._run(layers, x, train)

    def _run(self, layers, x, train):
        train = (self.mode == "train") if train is None else train
        x = np.asarray(x, dtype=np.float64)
        self._trace = []
        for layer in layers:
            x = layer.forward(x, train)
            self._trace.append(layer)
        return x

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads]

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


def backward(net: SequentialNet, loss_gradient) -> list[np.ndarray]:
    """Chain rule in reverse over the layers the last forward pass used.

    Returns the parameter gradients aligned with net.parameters(); layers
    outside the traced forward keep zero gradients.
    """
    if not net._trace:
        raise RuntimeError("backward called before any forward pass")
    grad = np.asarray(loss_gradient, dtype=np.float64)
    for layer in reversed(net._trace):
        grad = layer.backward(grad)
    net._trace = []
    return net.gradients()


def sgd_step(net: SequentialNet, gradients: list[np.ndarray], learning_rate: float):
    """In-place w <- w - lr * g over every parameter."""
    params = net.parameters()
    if len(params) != len(gradients):
        raise ValueError(f"got {len(gradients)} gradients for {len(params)} parameters")
    for p, g in zip(params, gradients):
        if p.shape != np.shape(g):
            raise ValueError(f"gradient shape {np.shape(g)} does not match parameter {p.shape}")
        p -= learning_rate * g
    return net


def predict_proba(net: SequentialNet, X, batch_size: int = 64) -> np.ndarray:
    """Eval-mode class probabilities, computed in batches."""
    X = np.asarray(X, dtype=np.float64)
    chunks = [net.forward(X[i : i + batch_size], train=False) for i in range(0, X.shape[0], batch_size)]
    return np.vstack(chunks)


def train(net: SequentialNet, X, Y, cfg: SGDConfig, augment_fn=None) -> tuple[SequentialNet, list[dict]]:
    """Mini-batch SGD against the fused softmax cross-entropy loss.

    Shuffling is seeded per run; dropout is live only inside the training
    step. `augment_fn(batch, rng) -> batch` runs on each training batch,
    so augmented variants are drawn fresh every epoch. History gets one
    {epoch, loss, accuracy} entry per epoch, accuracy measured eval-mode
    on the unaugmented training set.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    n = X.shape[0]
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if Y.shape[0] != n:
        raise ValueError("image count and label count differ")
    rng = np.random.default_rng(cfg.seed)
    history: list[dict] = []
    labels = Y.argmax(axis=1)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb = X[idx]
            if augment_fn is not None:
                xb = augment_fn(xb, rng)
            logits = net.forward_logits(xb, train=True)
            loss, grad = softmax_cross_entropy(logits, Y[idx])
            if not math.isfinite(loss):
                raise ValueError(f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}")
            sgd_step(net, backward(net, grad), cfg.learning_rate)
            total_loss += loss * idx.size
        probs = predict_proba(net, X, batch_size=cfg.batch_size)
        accuracy = float(np.mean(probs.argmax(axis=1) == labels))
        history.append({"epoch": epoch, "loss": total_loss / n, "accuracy": accuracy})
    return net, history
