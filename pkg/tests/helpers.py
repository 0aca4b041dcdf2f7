"""Shared builders for the test suite."""

from __future__ import annotations

import struct
import zlib

import numpy as np

from centroid_reg import (
    ClassCentroids,
    EmbeddingDataset,
    EmbeddingRecord,
    RegularizedHeadModel,
    compute_losses,
)
from centroid_reg.numerics import SeededRng


def make_random_dataset(
    rng: SeededRng,
    n_classes: int = 3,
    per_class: int = 4,
    dimension: int = 5,
    max_texts: int = 3,
    base_id: str = "s",
) -> EmbeddingDataset:
    """Random valid dataset; every class populated, text counts varied."""
    records = []
    for label in range(n_classes):
        for i in range(per_class):
            n_texts = int(rng.integers(1, max_texts + 1))
            records.append(
                EmbeddingRecord(
                    sample_id=f"{base_id}-{label}-{i}",
                    label=label,
                    image_embedding=rng.normal((dimension,)),
                    text_embeddings=[rng.normal((dimension,)) for _ in range(n_texts)],
                )
            )
    order = rng.permutation(len(records))
    records = [records[i] for i in order]
    ds = EmbeddingDataset(
        dimension=dimension,
        num_classes=n_classes,
        class_names=[f"cls{label}" for label in range(n_classes)],
        records=records,
    )
    ds.validate(require_all_classes=True)
    return ds


def random_training_instance(rng: SeededRng, alpha: float):
    """A small random (model, X, y, centroids, alpha) tuple for gradient
    checks, with parameters perturbed away from the structured init."""
    batch = int(rng.integers(1, 9))
    d_in = int(rng.integers(1, 9))
    d_emb = int(rng.integers(1, 9))
    n_classes = int(rng.integers(2, 6))
    model = RegularizedHeadModel.initialize(d_in, d_emb, n_classes, rng)
    model.W1 += rng.normal((d_emb, d_in), scale=0.5)
    model.b1 += rng.normal((d_emb,), scale=0.5)
    model.W2 += rng.normal((n_classes, d_emb), scale=0.5)
    model.b2 += rng.normal((n_classes,), scale=0.5)
    X = rng.normal((batch, d_in))
    y = np.array([int(rng.integers(0, n_classes)) for _ in range(batch)])
    cents = ClassCentroids(
        n_classes,
        d_emb,
        rng.normal((n_classes, d_emb)),
        np.ones(n_classes, dtype=np.int64),
    )
    return model, X, y, cents, alpha


def fd_gradients(model, X, y, cents, alpha, h=1e-6):
    """Central finite differences of the total loss over every parameter."""

    def total() -> float:
        return compute_losses(model, X, y, cents, alpha).j_total

    out = {}
    for name, p in model.param_blocks():
        grad = np.zeros_like(p)
        flat, gflat = p.reshape(-1), grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            j_plus = total()
            flat[i] = orig - h
            j_minus = total()
            flat[i] = orig
            gflat[i] = (j_plus - j_minus) / (2.0 * h)
        out[name] = grad
    return out


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.maximum(1e-3, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / scale))


def two_record_fixture_bytes() -> bytes:
    """Hand-assembled EMBD file: 2 classes, 2 records, dimension 3.

    Assembled byte by byte, independent of the writer, so reader tests
    cannot inherit a writer bug.
    """
    img0 = np.array([0.5, -1.25, 2.0], dtype="<f4")
    txt0a = np.array([1.0, 0.0, -0.5], dtype="<f4")
    txt0b = np.array([0.25, 0.75, 0.125], dtype="<f4")
    img1 = np.array([-2.0, 0.0, 1.5], dtype="<f4")

    payload = b""
    for name in (b"cat", b"dog"):
        payload += struct.pack("<H", len(name)) + name
    payload += struct.pack("<H", 5) + b"img-a"
    payload += struct.pack("<IB", 0, 2)
    payload += img0.tobytes() + txt0a.tobytes() + txt0b.tobytes()
    payload += struct.pack("<H", 5) + b"img-b"
    payload += struct.pack("<IB", 1, 0)
    payload += img1.tobytes()

    header = b"EMBD" + struct.pack(
        "<HIIQI", 1, 3, 2, 2, zlib.crc32(payload) & 0xFFFFFFFF
    )
    return header + payload


def two_record_fixture_dataset() -> EmbeddingDataset:
    """In-memory twin of :func:`two_record_fixture_bytes`."""
    return EmbeddingDataset(
        dimension=3,
        num_classes=2,
        class_names=["cat", "dog"],
        records=[
            EmbeddingRecord(
                "img-a",
                0,
                np.array([0.5, -1.25, 2.0]),
                [np.array([1.0, 0.0, -0.5]), np.array([0.25, 0.75, 0.125])],
            ),
            EmbeddingRecord("img-b", 1, np.array([-2.0, 0.0, 1.5]), []),
        ],
    )
