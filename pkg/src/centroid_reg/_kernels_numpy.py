"""Pure-numpy kernels: the fallback path behind ``backend``.

Everything here is vectorized numpy over float64 C-contiguous arrays.
Shapes follow one convention throughout: feature batches X are (B, d_in),
embedding batches E are (B, d_emb), logits Z are (B, n_classes), the
projection W1 is (d_emb, d_in), the head W2 is (n_classes, d_emb), and the
centroid table C is (n_classes, d_emb) indexed by integer labels y.
"""

from __future__ import annotations

import numpy as np


def matmul(a, b):
    return a @ b


def softmax_rows(m):
    shifted = m - m.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def squared_l2_distance(x, y):
    d = x - y
    return float(d @ d)


def forward(X, W1, b1, W2, b2):
    E = X @ W1.T + b1
    Z = E @ W2.T + b2
    return E, Z


def cross_entropy(Z, y):
    zmax = Z.max(axis=1)
    lse = np.log(np.exp(Z - zmax[:, None]).sum(axis=1)) + zmax
    picked = Z[np.arange(Z.shape[0]), y]
    return float(np.mean(lse - picked))


def reg_loss(E, y, C):
    d = E - C[y]
    return float(np.mean(np.einsum("ij,ij->i", d, d)))


def mean_centroid_distance(E, y, C):
    d = E - C[y]
    return float(np.mean(np.sqrt(np.einsum("ij,ij->i", d, d))))


def backward(X, y, C, W1, b1, W2, b2, alpha):
    """Fused forward + loss + analytic gradients of the total objective.

    Returns (j_ce, j_reg, gW1, gb1, gW2, gb2). Cross-entropy and the
    centroid pull are both batch means, so gradients carry a 1/B factor.
    The pull term reaches only the projection block: centroids are
    constants and the head sits after the embedding.
    """
    B = X.shape[0]
    E = X @ W1.T + b1
    Z = E @ W2.T + b2

    zmax = Z.max(axis=1)
    expz = np.exp(Z - zmax[:, None])
    sumexp = expz.sum(axis=1)
    j_ce = float(np.mean(np.log(sumexp) + zmax - Z[np.arange(B), y]))

    diff = E - C[y]
    j_reg = float(np.mean(np.einsum("ij,ij->i", diff, diff)))

    P = expz / sumexp[:, None]
    P[np.arange(B), y] -= 1.0
    gW2 = P.T @ E / B
    gb2 = P.sum(axis=0) / B

    delta = P @ W2 / B + (2.0 * alpha / B) * diff
    gW1 = delta.T @ X
    gb1 = delta.sum(axis=0)
    return j_ce, j_reg, gW1, gb1, gW2, gb2


def sgd_step(p, g, lr):
    p -= lr * g


def adam_step(p, g, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam update, in place. t is the 1-based step count."""
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * g * g
    mhat = m / (1.0 - beta1**t)
    vhat = v / (1.0 - beta2**t)
    p -= lr * mhat / (np.sqrt(vhat) + eps)
