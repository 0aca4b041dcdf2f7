"""Numba-jitted kernels: explicit-loop versions of ``_kernels_numpy``.

These carry the training hot path. The loops are written so LLVM can
vectorize the inner dimension; no fastmath, so results stay within a few
ulps of the numpy path and reruns are bit-identical. All kernels release
the GIL, which lets ``compare`` run its two arms on worker threads.

First call per signature pays JIT compilation; ``cache=True`` persists the
compiled code next to this module so later processes skip it.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def matmul(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(k):
            aij = a[i, j]
            for c in range(m):
                out[i, c] += aij * b[j, c]
    return out


@njit(cache=True, nogil=True)
def softmax_rows(m):
    n, k = m.shape
    out = np.empty((n, k))
    for i in range(n):
        rmax = m[i, 0]
        for j in range(1, k):
            if m[i, j] > rmax:
                rmax = m[i, j]
        s = 0.0
        for j in range(k):
            e = math.exp(m[i, j] - rmax)
            out[i, j] = e
            s += e
        for j in range(k):
            out[i, j] /= s
    return out


@njit(cache=True, nogil=True)
def squared_l2_distance(x, y):
    acc = 0.0
    for i in range(x.shape[0]):
        d = x[i] - y[i]
        acc += d * d
    return acc


@njit(cache=True, nogil=True)
def forward(X, W1, b1, W2, b2):
    """Project features to embeddings, then embeddings to logits.

    Parameters
    ----------
    X : (B, d_in) float64
        Frozen backbone features.
    W1, b1 : (d_emb, d_in), (d_emb,)
        Trainable projection.
    W2, b2 : (n_classes, d_emb), (n_classes,)
        Classification head.

    Returns
    -------
    (E, Z) : (B, d_emb), (B, n_classes)
        Embeddings and unnormalized logits.
    """
    B, d_in = X.shape
    d_emb = W1.shape[0]
    n_cls = W2.shape[0]
    E = np.empty((B, d_emb))
    Z = np.empty((B, n_cls))
    for i in range(B):
        for k in range(d_emb):
            acc = b1[k]
            for j in range(d_in):
                acc += W1[k, j] * X[i, j]
            E[i, k] = acc
        for c in range(n_cls):
            acc = b2[c]
            for k in range(d_emb):
                acc += W2[c, k] * E[i, k]
            Z[i, c] = acc
    return E, Z


@njit(cache=True, nogil=True)
def cross_entropy(Z, y):
    B, k = Z.shape
    total = 0.0
    for i in range(B):
        zmax = Z[i, 0]
        for j in range(1, k):
            if Z[i, j] > zmax:
                zmax = Z[i, j]
        s = 0.0
        for j in range(k):
            s += math.exp(Z[i, j] - zmax)
        total += math.log(s) + zmax - Z[i, y[i]]
    return total / B


@njit(cache=True, nogil=True)
def reg_loss(E, y, C):
    B, d = E.shape
    total = 0.0
    for i in range(B):
        for k in range(d):
            diff = E[i, k] - C[y[i], k]
            total += diff * diff
    return total / B


@njit(cache=True, nogil=True)
def mean_centroid_distance(E, y, C):
    B, d = E.shape
    total = 0.0
    for i in range(B):
        acc = 0.0
        for k in range(d):
            diff = E[i, k] - C[y[i], k]
            acc += diff * diff
        total += math.sqrt(acc)
    return total / B


@njit(cache=True, nogil=True)
def backward(X, y, C, W1, b1, W2, b2, alpha):
    """Fused train-step kernel: forward, both losses, all four gradients.

    Single pass over the batch with no large temporaries beyond the
    embedding and probability buffers. Semantics match
    ``_kernels_numpy.backward`` entry for entry.

    Returns
    -------
    (j_ce, j_reg, gW1, gb1, gW2, gb2)
    """
    B, d_in = X.shape
    d_emb = W1.shape[0]
    n_cls = W2.shape[0]

    E = np.empty((B, d_emb))
    P = np.empty((B, n_cls))
    z = np.empty(n_cls)
    gW1 = np.zeros((d_emb, d_in))
    gb1 = np.zeros(d_emb)
    gW2 = np.zeros((n_cls, d_emb))
    gb2 = np.zeros(n_cls)

    j_ce = 0.0
    j_reg = 0.0
    for i in range(B):
        for k in range(d_emb):
            acc = b1[k]
            for j in range(d_in):
                acc += W1[k, j] * X[i, j]
            E[i, k] = acc
        zmax = -np.inf
        for c in range(n_cls):
            acc = b2[c]
            for k in range(d_emb):
                acc += W2[c, k] * E[i, k]
            z[c] = acc
            if acc > zmax:
                zmax = acc
        s = 0.0
        for c in range(n_cls):
            e = math.exp(z[c] - zmax)
            P[i, c] = e
            s += e
        j_ce += math.log(s) + zmax - z[y[i]]
        for c in range(n_cls):
            P[i, c] /= s
        for k in range(d_emb):
            diff = E[i, k] - C[y[i], k]
            j_reg += diff * diff
    j_ce /= B
    j_reg /= B

    for i in range(B):
        label = y[i]
        for c in range(n_cls):
            pmy = P[i, c]
            if c == label:
                pmy -= 1.0
            gb2[c] += pmy / B
            for k in range(d_emb):
                gW2[c, k] += pmy * E[i, k] / B
        for k in range(d_emb):
            acc = 0.0
            for c in range(n_cls):
                pmy = P[i, c]
                if c == label:
                    pmy -= 1.0
                acc += pmy * W2[c, k]
            delta = acc / B + 2.0 * alpha * (E[i, k] - C[label, k]) / B
            gb1[k] += delta
            for j in range(d_in):
                gW1[k, j] += delta * X[i, j]

    return j_ce, j_reg, gW1, gb1, gW2, gb2


@njit(cache=True, nogil=True)
def sgd_step(p, g, lr):
    for i in range(p.shape[0]):
        p[i] -= lr * g[i]


@njit(cache=True, nogil=True)
def adam_step(p, g, m, v, t, lr, beta1, beta2, eps):
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for i in range(p.shape[0]):
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
        p[i] -= lr * (m[i] / c1) / (math.sqrt(v[i] / c2) + eps)
