"""Mean semantic class descriptions: per-class centroids of text embeddings.

Each class centroid is the arithmetic mean over *all* text embeddings of
all training records with that label, pooling across records and across
the descriptions each record carries. A record with ten descriptions
therefore weighs ten times one with a single description; there is no
per-record pre-averaging.

Accumulation order is fixed (records sorted by sample_id, descriptions in
stored order) so the result is bit-identical regardless of record order
in the input. Centroids are float64 end to end and round-trip exactly
through the EMBC container:

    header  magic "EMBC" | version u16 | dimension u32 | num_classes u32
            | payload_crc32 u32
    payload num_classes x (support_count u64 | centroid (dimension x f64))
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._binio import Cursor, atomic_write, build_container, read_container
from .dataset import DatasetInvariantError, EmbeddingDataset

EMBC_MAGIC = b"EMBC"


@dataclass(eq=False)
class ClassCentroids:
    num_classes: int
    dimension: int
    centroids: np.ndarray  # (num_classes, dimension) float64
    support_counts: np.ndarray  # (num_classes,) int64, all >= 1

    def validate(self) -> None:
        if self.centroids.shape != (self.num_classes, self.dimension):
            raise DatasetInvariantError(
                f"centroid matrix has shape {self.centroids.shape},"
                f" expected ({self.num_classes}, {self.dimension})"
            )
        if self.support_counts.shape != (self.num_classes,):
            raise DatasetInvariantError("one support count per class required")
        if np.any(self.support_counts < 1):
            empty = np.nonzero(self.support_counts < 1)[0]
            raise DatasetInvariantError(
                f"class(es) {empty.tolist()} have empty description sets"
            )


def _pairwise_sum(rows: np.ndarray) -> np.ndarray:
    """Sum (m, d) rows with a balanced fold instead of a running total.

    Besides the usual accuracy gain, the balanced tree makes one edge case
    exact: combining two equal partial sums never rounds, so the mean of
    2^k identical vectors is that vector bit for bit (the final division
    is a pure exponent shift). The noiseless-limit tests rely on this.
    """
    buf = np.array(rows, dtype=np.float64)
    m = buf.shape[0]
    while m > 1:
        k = m // 2
        buf[:k] += buf[k : 2 * k]
        if m % 2:
            buf[k] = buf[2 * k]
            m = k + 1
        else:
            m = k
    return buf[0]


def compute_class_centroids(
    train: EmbeddingDataset, normalize_text: bool = False
) -> ClassCentroids:
    """Average text embeddings per class over the training split.

    ``normalize_text`` rescales each text embedding to unit L2 norm before
    averaging; off by default (the plain mean). A class whose records
    carry no text embeddings at all is an error naming the class, since it
    signals a broken extraction upstream.
    """
    train.validate(require_all_classes=True)
    per_class: list[list[np.ndarray]] = [[] for _ in range(train.num_classes)]
    for rec in sorted(train.records, key=lambda r: r.sample_id):
        for t in rec.text_embeddings:
            if normalize_text:
                norm = float(np.linalg.norm(t))
                if norm > 0.0:
                    t = t / norm
            per_class[rec.label].append(t)
    empty = [label for label, rows in enumerate(per_class) if not rows]
    if empty:
        names = ", ".join(f"{i} ({train.class_names[i]!r})" for i in empty)
        raise DatasetInvariantError(
            f"no text embeddings for class(es) {names};"
            " cannot compute mean semantic descriptions"
        )
    counts = np.array([len(rows) for rows in per_class], dtype=np.int64)
    centroids = np.stack(
        [_pairwise_sum(np.stack(rows)) / len(rows) for rows in per_class]
    )
    result = ClassCentroids(train.num_classes, train.dimension, centroids, counts)
    result.validate()
    return result


def save_centroids(c: ClassCentroids, path) -> None:
    c.validate()
    payload = bytearray()
    for label in range(c.num_classes):
        payload += struct.pack("<Q", int(c.support_counts[label]))
        payload += c.centroids[label].astype("<f8").tobytes()
    blob = build_container(
        EMBC_MAGIC, "II", (c.dimension, c.num_classes), bytes(payload)
    )
    atomic_write(path, blob)


def load_centroids(path) -> ClassCentroids:
    with open(path, "rb") as fh:
        data = fh.read()
    (dimension, num_classes), payload, base = read_container(data, EMBC_MAGIC, "II")
    cur = Cursor(payload, base_offset=base)
    counts = np.zeros(num_classes, dtype=np.int64)
    centroids = np.zeros((num_classes, dimension))
    for label in range(num_classes):
        counts[label] = cur.u64(f"class {label} support count")
        centroids[label] = cur.f64_vector(dimension, f"class {label} centroid")
    cur.expect_end("last centroid")
    result = ClassCentroids(int(num_classes), int(dimension), centroids, counts)
    result.validate()
    return result
