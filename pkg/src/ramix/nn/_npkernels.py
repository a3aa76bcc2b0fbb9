"""Pure-numpy kernels, used when the compiled extension is unavailable.

Activations are channels-last: ``(batch, length, channels)``. Convolution
weights are passed to the kernels as ``(M, N, C)`` so that one im2col row is
the contiguous slab ``x_padded[b, i:i+N, :]``.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided

NAME = "numpy"


def _im2col(x, n):
    B, L, C = x.shape
    p = n // 2
    xp = np.zeros((B, L + 2 * p, C))
    xp[:, p : p + L] = x
    view = as_strided(xp, shape=(B, L, n * C), strides=(xp.strides[0], xp.strides[1], xp.strides[2]), writeable=False)
    return np.ascontiguousarray(view).reshape(B * L, n * C)


def conv1d_forward(x, w, b):
    """Same-padded, stride-1 cross-correlation.

    x: (B, L, C); w: (M, N, C) with odd N; b: (M,). Returns ``(out, cols)``
    with out (B, L, M) and the (B*L, N*C) patch matrix for the backward pass.
    """
    B, L, _ = x.shape
    M = w.shape[0]
    cols = _im2col(x, w.shape[1])
    out = cols @ w.reshape(M, -1).T
    out += b
    return out.reshape(B, L, M), cols


def conv1d_backward(dout, cols, w, need_dx=True):
    B, L, M = dout.shape
    _, N, C = w.shape
    d2 = dout.reshape(B * L, M)
    dw = (d2.T @ cols).reshape(M, N, C)
    db = d2.sum(axis=0)
    if not need_dx:
        return None, dw, db
    # input gradient is a correlation of dout with the flipped, transposed kernel
    wf = np.ascontiguousarray(w[:, ::-1, :].transpose(2, 1, 0)).reshape(C, N * M)
    dx = _im2col(dout, N) @ wf.T
    return dx.reshape(B, L, C), dw, db


def maxpool_forward(x, window):
    """Non-overlapping max-pool along the length axis of (B, L, C).

    A trailing partial window is pooled on its own. Returns ``(out, idx)``
    where idx is the absolute argmax position (first maximum on ties).
    """
    B, L, C = x.shape
    full = L // window
    vals, idxs = [], []
    if full:
        blocks = x[:, : full * window].reshape(B, full, window, C)
        a = blocks.argmax(axis=2)
        vals.append(np.take_along_axis(blocks, a[:, :, None, :], axis=2)[:, :, 0, :])
        idxs.append(a + (np.arange(full) * window)[None, :, None])
    if L % window:
        tail = x[:, full * window :]
        a = tail.argmax(axis=1)[:, None, :]
        vals.append(np.take_along_axis(tail, a, axis=1))
        idxs.append(a + full * window)
    return np.concatenate(vals, axis=1), np.concatenate(idxs, axis=1).astype(np.int64)


def maxpool_backward(dout, idx, length):
    B, _, C = dout.shape
    dx = np.zeros((B, length, C))
    np.put_along_axis(dx, idx, dout, axis=1)
    return dx
