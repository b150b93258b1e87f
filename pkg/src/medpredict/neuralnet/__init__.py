"""From-scratch NHWC float64 network engine and the two image classifiers."""

from .builders import build_lung_cnn, build_vgg16
from .layers import (
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool2D,
    ReLU,
    Softmax,
    conv2d_backward,
    conv2d_forward,
    dense_forward,
    dropout_forward,
    maxpool2d_backward,
    maxpool2d_forward,
    softmax,
    softmax_cross_entropy,
)
from .network import SequentialNet, SGDConfig, backward, predict_proba, sgd_step, train

__all__ = [
    "Conv2D",
    "Dense",
    "Dropout",
    "Flatten",
    "Layer",
    "MaxPool2D",
    "ReLU",
    "SGDConfig",
    "SequentialNet",
    "Softmax",
    "backward",
    "build_lung_cnn",
    "build_vgg16",
    "conv2d_backward",
    "conv2d_forward",
    "dense_forward",
    "dropout_forward",
    "maxpool2d_backward",
    "maxpool2d_forward",
    "predict_proba",
    "sgd_step",
    "softmax",
    "softmax_cross_entropy",
    "train",
]
