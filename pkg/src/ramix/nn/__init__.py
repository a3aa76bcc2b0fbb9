"""Minimal 1-D CNN toolkit: layers, losses, Adam and gradient checking."""

from .backend import available as available_backends
from .gradcheck import StackNetwork, grad_check
from .layers import (
    Conv1D,
    Dense,
    Flatten,
    Layer,
    MaxPool1D,
    ReLU,
    Sequential,
    Sigmoid,
    conv1d_forward,
    dense_forward,
    maxpool1d,
    relu,
    set_debug,
    sigmoid,
)
from .losses import bce_loss, weighted_mse_loss
from .optim import AdamState, adam_step

__all__ = [
    "AdamState",
    "Conv1D",
    "Dense",
    "Flatten",
    "Layer",
    "MaxPool1D",
    "ReLU",
    "Sequential",
    "Sigmoid",
    "StackNetwork",
    "adam_step",
    "available_backends",
    "bce_loss",
    "conv1d_forward",
    "dense_forward",
    "grad_check",
    "maxpool1d",
    "relu",
    "set_debug",
    "sigmoid",
    "weighted_mse_loss",
]
