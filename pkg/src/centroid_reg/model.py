"""Trainable architecture and the joint classification/attraction loss.

The model is two affine blocks over frozen backbone features h:

    embedding  x = W1 h + b1      (d_in -> d_emb, no activation)
    logits     z = W2 x + b2      (d_emb -> n_classes)

The embedding x is the regularization target: besides mean cross-entropy
on the logits, training minimizes the mean squared Euclidean distance
between each embedding and its class centroid, weighted by alpha:

    j_total = j_ce + alpha * j_reg

Both losses are batch means, so alpha keeps its meaning across batch and
dataset sizes. The centroids are constants; the attraction term therefore
reaches only the projection block (W1, b1), never the head.

Analytic gradients (B = batch size, P = softmax rows, Y = one-hot labels,
X = feature batch, E = embedding batch, C = matched centroids):

    gW2 = (P - Y)^T E / B          gb2 = column-mean(P - Y)
    dE  = (P - Y) W2 / B  +  2 alpha (E - C) / B
    gW1 = dE^T X                   gb1 = column-sum(dE)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import backend
from ._binio import Cursor, atomic_write, build_container, read_container
from .numerics import DimensionMismatchError, SeededRng

EMBM_MAGIC = b"EMBM"

W1_INIT_NOISE = 1e-3


@dataclass(eq=False)
class RegularizedHeadModel:
    d_in: int
    d_emb: int
    n_classes: int
    W1: np.ndarray  # (d_emb, d_in)
    b1: np.ndarray  # (d_emb,)
    W2: np.ndarray  # (n_classes, d_emb)
    b2: np.ndarray  # (n_classes,)

    @classmethod
    def initialize(
        cls, d_in: int, d_emb: int, n_classes: int, rng: SeededRng
    ) -> "RegularizedHeadModel":
        """Fresh parameters from a seeded generator.

        W1 starts as an identity block padded with zeros plus small noise,
        so the initial embedding approximates the raw feature (the
        finetuning-from-pretrained-output setup). W2 is Gaussian at scale
        1/sqrt(d_emb); biases start at zero. Draw order is fixed: W1
        noise first, then W2.
        """
        W1 = np.eye(d_emb, d_in) + rng.normal((d_emb, d_in), scale=W1_INIT_NOISE)
        W2 = rng.normal((n_classes, d_emb), scale=1.0 / np.sqrt(d_emb))
        return cls(
            d_in=d_in,
            d_emb=d_emb,
            n_classes=n_classes,
            W1=np.ascontiguousarray(W1),
            b1=np.zeros(d_emb),
            W2=np.ascontiguousarray(W2),
            b2=np.zeros(n_classes),
        )

    def param_blocks(self) -> list[tuple[str, np.ndarray]]:
        """Trainable blocks in the fixed update order."""
        return [("W1", self.W1), ("b1", self.b1), ("W2", self.W2), ("b2", self.b2)]

    def all_finite(self) -> bool:
        return all(bool(np.isfinite(p).all()) for _, p in self.param_blocks())

    def copy(self) -> "RegularizedHeadModel":
        return RegularizedHeadModel(
            self.d_in,
            self.d_emb,
            self.n_classes,
            self.W1.copy(),
            self.b1.copy(),
            self.W2.copy(),
            self.b2.copy(),
        )


@dataclass(frozen=True)
class LossBreakdown:
    j_ce: float
    j_reg: float
    j_total: float
    alpha: float


@dataclass(eq=False)
class Gradients:
    gW1: np.ndarray
    gb1: np.ndarray
    gW2: np.ndarray
    gb2: np.ndarray

    def blocks(self) -> list[tuple[str, np.ndarray]]:
        return [("W1", self.gW1), ("b1", self.gb1), ("W2", self.gW2), ("b2", self.gb2)]


def _check_features(model: RegularizedHeadModel, features: np.ndarray) -> np.ndarray:
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.d_in:
        raise DimensionMismatchError(
            f"feature batch has shape {features.shape},"
            f" expected (B, {model.d_in})"
        )
    return features


def _check_labels(labels, n_classes: int) -> np.ndarray:
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise DimensionMismatchError(f"labels must be 1-D, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        bad = labels[(labels < 0) | (labels >= n_classes)][0]
        raise ValueError(f"label {bad} out of range [0, {n_classes})")
    return labels


def _check_centroids(centroids, d_emb: int) -> np.ndarray:
    mat = np.ascontiguousarray(centroids.centroids, dtype=np.float64)
    if mat.shape[1] != d_emb:
        raise DimensionMismatchError(
            f"centroid dimension {mat.shape[1]} != embedding dimension {d_emb}"
        )
    return mat


def forward(model: RegularizedHeadModel, features) -> tuple[np.ndarray, np.ndarray]:
    """Return (embeddings, logits) for a feature batch."""
    X = _check_features(model, features)
    return backend.kernels().forward(X, model.W1, model.b1, model.W2, model.b2)


def cross_entropy(logits, labels) -> float:
    """Mean negative log softmax probability of the true class."""
    Z = np.ascontiguousarray(logits, dtype=np.float64)
    y = _check_labels(labels, Z.shape[1])
    if Z.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"{Z.shape[0]} logit rows but {y.shape[0]} labels"
        )
    return float(backend.kernels().cross_entropy(Z, y))


def reg_loss(embeddings, labels, centroids) -> float:
    """Mean squared distance from each embedding to its class centroid."""
    E = np.ascontiguousarray(embeddings, dtype=np.float64)
    C = _check_centroids(centroids, E.shape[1])
    y = _check_labels(labels, C.shape[0])
    return float(backend.kernels().reg_loss(E, y, C))


def total_loss(j_ce: float, j_reg: float, alpha: float) -> LossBreakdown:
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return LossBreakdown(
        j_ce=float(j_ce),
        j_reg=float(j_reg),
        j_total=float(j_ce) + alpha * float(j_reg),
        alpha=float(alpha),
    )


def compute_losses(
    model: RegularizedHeadModel, features, labels, centroids, alpha: float
) -> LossBreakdown:
    """Loss evaluation via the forward path only (no gradients)."""
    E, Z = forward(model, features)
    return total_loss(cross_entropy(Z, labels), reg_loss(E, labels, centroids), alpha)


def backward(
    model: RegularizedHeadModel, features, labels, centroids, alpha: float
) -> tuple[LossBreakdown, Gradients]:
    """Losses plus analytic gradients of j_total for all four blocks."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    X = _check_features(model, features)
    y = _check_labels(labels, model.n_classes)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
    C = _check_centroids(centroids, model.d_emb)
    j_ce, j_reg, gW1, gb1, gW2, gb2 = backend.kernels().backward(
        X, y, C, model.W1, model.b1, model.W2, model.b2, float(alpha)
    )
    return total_loss(j_ce, j_reg, alpha), Gradients(gW1, gb1, gW2, gb2)


def save_model(model: RegularizedHeadModel, path) -> None:
    """Checkpoint as EMBM: header then W1, b1, W2, b2 as f64 row-major."""
    payload = (
        model.W1.astype("<f8").tobytes()
        + model.b1.astype("<f8").tobytes()
        + model.W2.astype("<f8").tobytes()
        + model.b2.astype("<f8").tobytes()
    )
    blob = build_container(
        EMBM_MAGIC, "III", (model.d_in, model.d_emb, model.n_classes), payload
    )
    atomic_write(path, blob)


def load_model(path) -> RegularizedHeadModel:
    with open(path, "rb") as fh:
        data = fh.read()
    (d_in, d_emb, n_classes), payload, base = read_container(data, EMBM_MAGIC, "III")
    cur = Cursor(payload, base_offset=base)
    W1 = cur.f64_vector(d_emb * d_in, "W1").reshape(d_emb, d_in)
    b1 = cur.f64_vector(d_emb, "b1")
    W2 = cur.f64_vector(n_classes * d_emb, "W2").reshape(n_classes, d_emb)
    b2 = cur.f64_vector(n_classes, "b2")
    cur.expect_end("parameter blocks")
    return RegularizedHeadModel(int(d_in), int(d_emb), int(n_classes), W1, b1, W2, b2)
