"""Numba-jitted twins of the numpy hot kernels.

Same flat parameter layout and the same shift-softmax / log-space loss as
the numpy backend; see numpy_backend for the layout description. Written
as explicit loops: at the batch and layer widths this package trains
(tens of units, batches of 16), loop kernels beat the per-call overhead
of BLAS dispatch. No prange — kernels stay single-threaded so runs are
bit-reproducible.
"""

from __future__ import annotations

import numpy as np
from numba import njit

PROB_FLOOR = 1e-308


@njit(cache=True)
def forward_probs(params, dims, act_code, x):
    batch = x.shape[0]
    n_aff = dims.shape[0] - 1
    a = x
    off = 0
    for l in range(n_aff):
        din = dims[l]
        dout = dims[l + 1]
        boff = off + din * dout
        z = np.empty((batch, dout))
        for i in range(batch):
            for j in range(dout):
                z[i, j] = params[boff + j]
            for m in range(din):
                aim = a[i, m]
                base = off + m * dout
                for j in range(dout):
                    z[i, j] += aim * params[base + j]
        off = boff + dout
        if l < n_aff - 1:
            if act_code == 0:
                for i in range(batch):
                    for j in range(dout):
                        if z[i, j] < 0.0:
                            z[i, j] = 0.0
            else:
                for i in range(batch):
                    for j in range(dout):
                        z[i, j] = np.tanh(z[i, j])
        else:
            for i in range(batch):
                mx = z[i, 0]
                for j in range(1, dout):
                    if z[i, j] > mx:
                        mx = z[i, j]
                s = 0.0
                for j in range(dout):
                    e = np.exp(z[i, j] - mx)
                    z[i, j] = e
                    s += e
                for j in range(dout):
                    p = z[i, j] / s
                    if p < PROB_FLOOR:
                        p = PROB_FLOOR
                    z[i, j] = p
        a = z
    return a


@njit(cache=True)
def loss_grad(params, dims, act_code, x, y):
    batch = x.shape[0]
    n_aff = dims.shape[0] - 1
    n_classes = dims[n_aff]

    offs = np.empty(n_aff + 1, np.int64)
    offs[0] = 0
    for l in range(n_aff):
        offs[l + 1] = offs[l] + dims[l] * dims[l + 1] + dims[l + 1]

    # Forward, keeping the input of every affine layer for the backward pass.
    acts = [x]
    a = x
    for l in range(n_aff - 1):
        din = dims[l]
        dout = dims[l + 1]
        off = offs[l]
        boff = off + din * dout
        z = np.empty((batch, dout))
        for i in range(batch):
            for j in range(dout):
                z[i, j] = params[boff + j]
            for m in range(din):
                aim = a[i, m]
                base = off + m * dout
                for j in range(dout):
                    z[i, j] += aim * params[base + j]
        if act_code == 0:
            for i in range(batch):
                for j in range(dout):
                    if z[i, j] < 0.0:
                        z[i, j] = 0.0
        else:
            for i in range(batch):
                for j in range(dout):
                    z[i, j] = np.tanh(z[i, j])
        acts.append(z)
        a = z

    din = dims[n_aff - 1]
    off = offs[n_aff - 1]
    boff = off + din * n_classes
    logits = np.empty((batch, n_classes))
    for i in range(batch):
        for j in range(n_classes):
            logits[i, j] = params[boff + j]
        for m in range(din):
            aim = a[i, m]
            base = off + m * n_classes
            for j in range(n_classes):
                logits[i, j] += aim * params[base + j]

    loss = 0.0
    delta = np.empty((batch, n_classes))
    for i in range(batch):
        mx = logits[i, 0]
        for j in range(1, n_classes):
            if logits[i, j] > mx:
                mx = logits[i, j]
        s = 0.0
        for j in range(n_classes):
            e = np.exp(logits[i, j] - mx)
            delta[i, j] = e
            s += e
        loss -= logits[i, y[i]] - mx - np.log(s)
        for j in range(n_classes):
            delta[i, j] /= s
        delta[i, y[i]] -= 1.0
        for j in range(n_classes):
            delta[i, j] /= batch
    loss /= batch

    grad = np.zeros_like(params)
    for l in range(n_aff - 1, -1, -1):
        din = dims[l]
        dout = dims[l + 1]
        off = offs[l]
        boff = off + din * dout
        ain = acts[l]
        for i in range(batch):
            for m in range(din):
                aim = ain[i, m]
                base = off + m * dout
                for j in range(dout):
                    grad[base + j] += aim * delta[i, j]
            for j in range(dout):
                grad[boff + j] += delta[i, j]
        if l > 0:
            prev = np.empty((batch, din))
            for i in range(batch):
                for m in range(din):
                    s = 0.0
                    base = off + m * dout
                    for j in range(dout):
                        s += delta[i, j] * params[base + j]
                    prev[i, m] = s
            if act_code == 0:
                for i in range(batch):
                    for m in range(din):
                        if ain[i, m] <= 0.0:
                            prev[i, m] = 0.0
            else:
                for i in range(batch):
                    for m in range(din):
                        prev[i, m] *= 1.0 - ain[i, m] * ain[i, m]
            delta = prev
    return loss, grad
