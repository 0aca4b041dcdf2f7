"""Labeled embedding datasets and the EMBD interchange container.

An EMBD file (version 1, little-endian) holds one dataset:

    header  magic "EMBD" | version u16 | dimension u32 | num_classes u32
            | record_count u64 | payload_crc32 u32
    payload class table: num_classes x (name_len u16 | UTF-8 name)
            records:     id_len u16 | UTF-8 id | label u32 | text_count u8
                         | image vector (dimension x f32)
                         | text_count x (dimension x f32)

The CRC covers everything after the header. Vectors are stored as 32-bit
floats and widened to float64 at load; training runs entirely in float64.

A JSON-lines text form exists for small hand-written fixtures: one record
object per line with fields ``sample_id``, ``label``, ``image_embedding``
and optional ``text_embeddings``. An optional first line may be a header
object carrying ``num_classes`` / ``class_names`` / ``dimension``;
otherwise those are inferred. The binary form is canonical.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from ._binio import (
    BadMagicError,
    ChecksumMismatchError,
    Cursor,
    FormatError,
    TrailingBytesError,
    TruncatedFileError,
    UnsupportedVersionError,
    atomic_write,
    build_container,
    read_container,
)
from .numerics import SeededRng

__all__ = [
    "EmbeddingRecord",
    "EmbeddingDataset",
    "DatasetSplit",
    "DatasetInvariantError",
    "FormatError",
    "BadMagicError",
    "UnsupportedVersionError",
    "TruncatedFileError",
    "ChecksumMismatchError",
    "TrailingBytesError",
    "read_embd",
    "write_embd",
    "read_jsonl",
    "read_dataset",
    "split_dataset",
]

EMBD_MAGIC = b"EMBD"
MAX_TEXT_EMBEDDINGS = 255  # u8 count field


class DatasetInvariantError(ValueError):
    """A dataset (in memory or decoded from disk) violates a type invariant."""


@dataclass(eq=False)
class EmbeddingRecord:
    sample_id: str
    label: int
    image_embedding: np.ndarray
    text_embeddings: list[np.ndarray] = field(default_factory=list)


@dataclass(eq=False)
class EmbeddingDataset:
    dimension: int
    num_classes: int
    class_names: list[str]
    records: list[EmbeddingRecord]

    def validate(self, require_all_classes: bool = False) -> None:
        """Raise DatasetInvariantError on any violated invariant.

        ``require_all_classes`` enforces the training-role rule that every
        class index appears in at least one record.
        """
        if self.dimension < 1:
            raise DatasetInvariantError(f"dimension must be >= 1, got {self.dimension}")
        if self.num_classes < 1:
            raise DatasetInvariantError(
                f"num_classes must be >= 1, got {self.num_classes}"
            )
        if len(self.class_names) != self.num_classes:
            raise DatasetInvariantError(
                f"class table has {len(self.class_names)} names"
                f" but num_classes is {self.num_classes}"
            )
        seen_ids = set()
        seen_labels = set()
        for idx, rec in enumerate(self.records):
            where = f"record {idx} ({rec.sample_id!r})"
            if not (0 <= rec.label < self.num_classes):
                raise DatasetInvariantError(
                    f"{where} has label {rec.label}, outside [0, {self.num_classes})"
                )
            if rec.sample_id in seen_ids:
                raise DatasetInvariantError(f"duplicate sample_id {rec.sample_id!r}")
            seen_ids.add(rec.sample_id)
            if rec.image_embedding.shape != (self.dimension,):
                raise DatasetInvariantError(
                    f"{where} image vector has length"
                    f" {rec.image_embedding.shape}, expected ({self.dimension},)"
                )
            if len(rec.text_embeddings) > MAX_TEXT_EMBEDDINGS:
                raise DatasetInvariantError(
                    f"{where} carries {len(rec.text_embeddings)} text embeddings,"
                    f" format allows at most {MAX_TEXT_EMBEDDINGS}"
                )
            for j, t in enumerate(rec.text_embeddings):
                if t.shape != (self.dimension,):
                    raise DatasetInvariantError(
                        f"{where} text embedding {j} has length {t.shape},"
                        f" expected ({self.dimension},)"
                    )
            seen_labels.add(rec.label)
        if require_all_classes:
            missing = sorted(set(range(self.num_classes)) - seen_labels)
            if missing:
                names = ", ".join(
                    f"{i} ({self.class_names[i]!r})" for i in missing
                )
                raise DatasetInvariantError(
                    f"training dataset has no records for class(es) {names}"
                )

    def features(self) -> np.ndarray:
        """All image embeddings stacked into an (N, D) float64 matrix."""
        if not self.records:
            return np.zeros((0, self.dimension))
        return np.ascontiguousarray(
            np.stack([r.image_embedding for r in self.records]), dtype=np.float64
        )

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int64)

    def class_counts(self) -> list[int]:
        counts = [0] * self.num_classes
        for rec in self.records:
            counts[rec.label] += 1
        return counts

    def text_counts_per_class(self) -> list[int]:
        counts = [0] * self.num_classes
        for rec in self.records:
            counts[rec.label] += len(rec.text_embeddings)
        return counts

    def equals(self, other: "EmbeddingDataset", vector_precision: str = "exact") -> bool:
        """Structural equality; ``vector_precision="f32"`` compares vectors
        after rounding both sides to 32-bit (the on-disk precision)."""

        def same(a: np.ndarray, b: np.ndarray) -> bool:
            if vector_precision == "f32":
                a = a.astype(np.float32)
                b = b.astype(np.float32)
            return a.shape == b.shape and bool(np.array_equal(a, b))

        if (
            self.dimension != other.dimension
            or self.num_classes != other.num_classes
            or self.class_names != other.class_names
            or len(self.records) != len(other.records)
        ):
            return False
        for ra, rb in zip(self.records, other.records):
            if ra.sample_id != rb.sample_id or ra.label != rb.label:
                return False
            if not same(ra.image_embedding, rb.image_embedding):
                return False
            if len(ra.text_embeddings) != len(rb.text_embeddings):
                return False
            for ta, tb in zip(ra.text_embeddings, rb.text_embeddings):
                if not same(ta, tb):
                    return False
        return True


@dataclass(eq=False)
class DatasetSplit:
    train: EmbeddingDataset
    test: EmbeddingDataset

    def validate(self) -> None:
        if (
            self.train.dimension != self.test.dimension
            or self.train.num_classes != self.test.num_classes
            or self.train.class_names != self.test.class_names
        ):
            raise DatasetInvariantError(
                "train and test disagree on dimension, class count or class names"
            )
        overlap = {r.sample_id for r in self.train.records} & {
            r.sample_id for r in self.test.records
        }
        if overlap:
            raise DatasetInvariantError(
                f"sample ids present in both splits: {sorted(overlap)[:5]}"
            )
        self.train.validate(require_all_classes=True)
        self.test.validate()


def write_embd(ds: EmbeddingDataset, path) -> None:
    """Serialize to the EMBD v1 layout; byte-for-byte deterministic."""
    ds.validate()
    payload = bytearray()
    for name in ds.class_names:
        raw = name.encode("utf-8")
        payload += struct.pack("<H", len(raw)) + raw
    for rec in ds.records:
        rid = rec.sample_id.encode("utf-8")
        payload += struct.pack("<H", len(rid)) + rid
        payload += struct.pack("<IB", rec.label, len(rec.text_embeddings))
        payload += rec.image_embedding.astype("<f4").tobytes()
        for t in rec.text_embeddings:
            payload += t.astype("<f4").tobytes()
    blob = build_container(
        EMBD_MAGIC,
        "IIQ",
        (ds.dimension, ds.num_classes, len(ds.records)),
        bytes(payload),
    )
    atomic_write(path, blob)


def read_embd(path) -> EmbeddingDataset:
    """Parse and fully validate an EMBD file.

    Every malformation maps to a structured error: bad magic, unsupported
    version, truncation, checksum mismatch, trailing bytes, or a dataset
    invariant violation. A successfully returned dataset always satisfies
    all type invariants.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    (dimension, num_classes, record_count), payload, base = read_container(
        data, EMBD_MAGIC, "IIQ"
    )
    cur = Cursor(payload, base_offset=base)
    class_names = []
    for i in range(num_classes):
        n = cur.u16(f"class name {i} length")
        class_names.append(cur.utf8(n, f"class name {i}"))
    records = []
    for r in range(record_count):
        n = cur.u16(f"record {r} id length")
        sample_id = cur.utf8(n, f"record {r} id")
        label = cur.u32(f"record {r} label")
        text_count = cur.u8(f"record {r} text count")
        image = cur.f32_vector(dimension, f"record {r} image vector")
        texts = [
            cur.f32_vector(dimension, f"record {r} text vector {j}")
            for j in range(text_count)
        ]
        records.append(EmbeddingRecord(sample_id, label, image, texts))
    cur.expect_end("last record")
    ds = EmbeddingDataset(int(dimension), int(num_classes), class_names, records)
    ds.validate()
    return ds


def read_jsonl(path) -> EmbeddingDataset:
    """Parse the JSON-lines fixture form (see module docstring)."""
    dimension = None
    num_classes = None
    class_names = None
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise FormatError(f"line {lineno}: expected a JSON object")
            if "sample_id" not in obj:
                if records or lineno > 1:
                    raise FormatError(f"line {lineno}: record missing 'sample_id'")
                # leading header object
                num_classes = obj.get("num_classes", num_classes)
                class_names = obj.get("class_names", class_names)
                dimension = obj.get("dimension", dimension)
                continue
            try:
                image = np.asarray(obj["image_embedding"], dtype=np.float64)
                texts = [
                    np.asarray(t, dtype=np.float64)
                    for t in obj.get("text_embeddings", [])
                ]
                rec = EmbeddingRecord(
                    str(obj["sample_id"]), int(obj["label"]), image, texts
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"line {lineno}: bad record: {exc}") from exc
            records.append(rec)
    if not records:
        raise FormatError("no records found in JSON-lines input")
    if dimension is None:
        dimension = int(records[0].image_embedding.shape[0])
    if num_classes is None:
        if class_names is not None:
            num_classes = len(class_names)
        else:
            num_classes = max(r.label for r in records) + 1
    if class_names is None:
        class_names = [f"class_{i}" for i in range(num_classes)]
    ds = EmbeddingDataset(int(dimension), int(num_classes), list(class_names), records)
    ds.validate()
    return ds


def read_dataset(path) -> EmbeddingDataset:
    """Sniff binary vs JSON-lines and parse accordingly."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == EMBD_MAGIC:
        return read_embd(path)
    return read_jsonl(path)


def split_dataset(
    ds: EmbeddingDataset, test_fraction: float, rng: SeededRng
) -> DatasetSplit:
    """Stratified train/test split, deterministic under the rng's seed.

    Per class, round(test_fraction * class_count) records move to test
    (half-up rounding), capped so at least one record stays in train.
    """
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    ds.validate(require_all_classes=True)
    by_class: list[list[int]] = [[] for _ in range(ds.num_classes)]
    for idx, rec in enumerate(ds.records):
        by_class[rec.label].append(idx)
    for label, members in enumerate(by_class):
        if len(members) < 2:
            raise DatasetInvariantError(
                f"class {label} ({ds.class_names[label]!r}) has"
                f" {len(members)} record(s); need at least 2 to split"
            )
    test_idx: set[int] = set()
    for members in by_class:
        n_test = int(math.floor(test_fraction * len(members) + 0.5))
        n_test = min(n_test, len(members) - 1)
        order = rng.permutation(len(members))
        test_idx.update(members[i] for i in order[:n_test])
    train_records = [r for i, r in enumerate(ds.records) if i not in test_idx]
    test_records = [r for i, r in enumerate(ds.records) if i in test_idx]
    split = DatasetSplit(
        train=EmbeddingDataset(
            ds.dimension, ds.num_classes, list(ds.class_names), train_records
        ),
        test=EmbeddingDataset(
            ds.dimension, ds.num_classes, list(ds.class_names), test_records
        ),
    )
    split.validate()
    return split
