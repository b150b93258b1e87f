"""Network builders for the two image classifiers.

Hyperparameters the builders fix (filter counts, dense widths, dropout
rate) are the smallest standard choices matching each architecture's
published outline; both nets use He-initialized weights from a single
build seed so construction is reproducible.
"""

from __future__ import annotations

import numpy as np

from .layers import Conv2D, Dense, Dropout, Flatten, MaxPool2D, ReLU, Softmax
from .network import SequentialNet


def build_lung_cnn(input_size=(64, 64), n_classes: int = 3, in_channels: int = 3, seed: int = 0) -> SequentialNet:
    """Three-conv-block classifier for histopathology tiles.

    conv 32/64/128 at 3x3 'same' + relu with a 2x2 maxpool after each
    block, then flatten, dense 128 + relu, dropout 0.5 and a dense softmax
    head. Input H and W must be divisible by 8 (three pooling halvings).
    """
    h, w = input_size
    if h % 8 != 0 or w % 8 != 0:
        raise ValueError(f"input size {h}x{w} must be divisible by 8")
    if n_classes < 2:
        raise ValueError("n_classes must be >= 2")
    rng = np.random.default_rng(seed)
    layers = [
        Conv2D(in_channels, 32, 3, padding="same", rng=rng),
        ReLU(),
        MaxPool2D(2),
        Conv2D(32, 64, 3, padding="same", rng=rng),
        ReLU(),
        MaxPool2D(2),
        Conv2D(64, 128, 3, padding="same", rng=rng),
        ReLU(),
        MaxPool2D(2),
        Flatten(),
        Dense((h // 8) * (w // 8) * 128, 128, rng=rng),
        ReLU(),
        Dropout(0.5, rng=np.random.default_rng([seed, 10])),
        Dense(128, n_classes, rng=rng),
        Softmax(),
    ]
    return SequentialNet(layers, input_shape=(h, w, in_channels))


def build_vgg16(n_classes: int = 2, seed: int = 0) -> SequentialNet:
    """VGG-16 for 224x224x3 input: thirteen 3x3 'same' conv layers in five
    pooled blocks (2x64, 2x128, 3x256, 3x512, 3x512), then dense 4096,
    dense 4096 and a dense softmax head — sixteen weight layers."""
    if n_classes < 2:
        raise ValueError("n_classes must be >= 2")
    rng = np.random.default_rng(seed)
    layers: list = []
    channels = 3
    for block in ([64, 64], [128, 128], [256, 256, 256], [512, 512, 512], [512, 512, 512]):
        for width in block:
            layers.append(Conv2D(channels, width, 3, padding="same", rng=rng))
            layers.append(ReLU())
            channels = width
        layers.append(MaxPool2D(2))
    layers.append(Flatten())
    layers.append(Dense(7 * 7 * 512, 4096, rng=rng))
    layers.append(ReLU())
    layers.append(Dense(4096, 4096, rng=rng))
    layers.append(ReLU())
    layers.append(Dense(4096, n_classes, rng=rng))
    layers.append(Softmax())
    return SequentialNet(layers, input_shape=(224, 224, 3))
