"""Finite-difference verification of backpropagated gradients."""

import numpy as np

from .layers import Sequential
from .losses import bce_loss, weighted_mse_loss


class StackNetwork:
    """A :class:`Sequential` stack closed by a loss, usable with :func:`grad_check`.

    ``loss`` is ``"bce"`` (stack outputs logits) or ``"mse"``.
    """

    def __init__(self, layers, loss="bce", weights=None):
        self.body = layers if isinstance(layers, Sequential) else Sequential(layers)
        if loss not in ("bce", "mse"):
            raise ValueError(f"unknown loss {loss!r}")
        self.loss = loss
        self.weights = weights

    def params(self):
        return self.body.named_params()

    def loss_and_grads(self, x, targets):
        out = self.body.forward(x)
        if self.loss == "bce":
            value, dout = bce_loss(out, targets)
        else:
            value, dout = weighted_mse_loss(out, targets, self.weights)
        self.body.backward(dout)
        return value, self.body.named_grads()


def grad_check(network, inputs, targets, epsilon=1e-5):
    """Max relative error between finite differences and backprop gradients.

    ``network`` must expose ``params()`` (name -> array, mutated in place here)
    and ``loss_and_grads(inputs, targets) -> (loss, grads)``. Derivatives use
    the fourth-order central stencil with step ``epsilon``; the relative error
    of one entry is ``|fd - bp| / max(1e-8, |fd| + |bp|)``. The default step
    keeps ReLU and max-pool switch points out of the stencil for typical
    inputs; smooth networks tolerate (and profit from) a larger step.
    """
    _, grads = network.loss_and_grads(inputs, targets)
    grads = {k: np.array(v, copy=True) for k, v in grads.items()}

    def loss_at(flat, i, value):
        flat[i] = value
        return network.loss_and_grads(inputs, targets)[0]

    worst = 0.0
    for name, p in network.params().items():
        flat = p.reshape(-1)
        gflat = grads[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            f2p = loss_at(flat, i, orig + 2 * epsilon)
            f1p = loss_at(flat, i, orig + epsilon)
            f1m = loss_at(flat, i, orig - epsilon)
            f2m = loss_at(flat, i, orig - 2 * epsilon)
            flat[i] = orig
            fd = (8.0 * (f1p - f1m) - (f2p - f2m)) / (12.0 * epsilon)
            err = abs(fd - gflat[i]) / max(1e-8, abs(fd) + abs(gflat[i]))
            worst = max(worst, err)
    # leave the network's cached state consistent with the unperturbed parameters
    network.loss_and_grads(inputs, targets)
    return worst
