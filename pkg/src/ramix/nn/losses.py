"""Loss functions returning ``(value, gradient)``."""

import numpy as np

from ..errors import ShapeError
from .layers import sigmoid


def bce_loss(logits, targets):
    """Mean binary cross-entropy computed from logits.

    Uses ``max(z, 0) - z*y + log1p(exp(-|z|))``, which never overflows.
    The gradient is with respect to the logits.
    """
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if z.shape != y.shape:
        raise ShapeError(f"logits {z.shape} and targets {y.shape} differ")
    n = z.size
    loss = np.sum(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))) / n
    grad = (sigmoid(z) - y) / n
    return float(loss), grad


def weighted_mse_loss(pred, targets, weights=None):
    """``sum(w * (p - t)**2) / sum(w)``; uniform weights reduce to plain MSE."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"pred {p.shape} and targets {t.shape} differ")
    w = np.ones_like(p) if weights is None else np.broadcast_to(np.asarray(weights, dtype=np.float64), p.shape)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if not total > 0:
        raise ValueError("weights must not all be zero")
    r = p - t
    return float(np.sum(w * r * r) / total), 2.0 * w * r / total
