"""Vectorised numpy implementations of the classifier hot kernels.

Parameter layout (shared with the numba backend): one flat float64 vector
holding, per affine layer l with input width ``din`` and output width
``dout``, the row-major weight block ``W[din, dout]`` followed by the bias
``b[dout]``. ``dims`` is the full width sequence
``(input_dim, *hidden_dims, num_classes)``.

Softmax outputs are clamped to 1e-308 so probabilities stay strictly
positive even when a logit gap underflows exp().
"""

from __future__ import annotations

import numpy as np

PROB_FLOOR = 1e-308


def layer_offsets(dims: np.ndarray) -> np.ndarray:
    """Flat-vector start offset of each affine layer (plus the total size)."""
    n_aff = len(dims) - 1
    offs = np.zeros(n_aff + 1, dtype=np.int64)
    for l in range(n_aff):
        offs[l + 1] = offs[l] + dims[l] * dims[l + 1] + dims[l + 1]
    return offs


def _affine(params, off, din, dout, a):
    w = params[off:off + din * dout].reshape(din, dout)
    b = params[off + din * dout:off + din * dout + dout]
    return a @ w + b


def softmax_rows(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1, keepdims=True)
    e = np.exp(z - m)
    p = e / e.sum(axis=1, keepdims=True)
    return np.maximum(p, PROB_FLOOR)


def forward_probs(params, dims, act_code, x):
    """Class probabilities for a batch; x is (B, input_dim) float64."""
    n_aff = len(dims) - 1
    offs = layer_offsets(dims)
    a = x
    for l in range(n_aff):
        z = _affine(params, offs[l], dims[l], dims[l + 1], a)
        if l < n_aff - 1:
            a = np.maximum(z, 0.0) if act_code == 0 else np.tanh(z)
        else:
            a = softmax_rows(z)
    return a


def loss_grad(params, dims, act_code, x, y):
    """Mean cross-entropy over the batch and its gradient (flat, same layout).

    The loss is evaluated in log space, so extreme logits give large finite
    losses instead of infinities from an underflowed probability.
    """
    batch = x.shape[0]
    n_aff = len(dims) - 1
    offs = layer_offsets(dims)

    acts = [x]
    a = x
    for l in range(n_aff - 1):
        z = _affine(params, offs[l], dims[l], dims[l + 1], a)
        a = np.maximum(z, 0.0) if act_code == 0 else np.tanh(z)
        acts.append(a)
    logits = _affine(params, offs[n_aff - 1], dims[n_aff - 1], dims[n_aff], a)

    m = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - m)
    s = e.sum(axis=1, keepdims=True)
    rows = np.arange(batch)
    log_p_true = logits[rows, y] - m[:, 0] - np.log(s[:, 0])
    loss = float(-log_p_true.mean())

    delta = e / s
    delta[rows, y] -= 1.0
    delta /= batch

    grad = np.zeros_like(params)
    for l in range(n_aff - 1, -1, -1):
        din, dout, off = dims[l], dims[l + 1], offs[l]
        grad[off:off + din * dout] = (acts[l].T @ delta).ravel()
        grad[off + din * dout:off + din * dout + dout] = delta.sum(axis=0)
        if l > 0:
            w = params[off:off + din * dout].reshape(din, dout)
            da = delta @ w.T
            if act_code == 0:
                delta = da * (acts[l] > 0.0)
            else:
                delta = da * (1.0 - acts[l] ** 2)
    return loss, grad
