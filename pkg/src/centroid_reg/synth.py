"""Synthetic Gaussian-mixture scenarios with known class anchors.

Each class l gets a true anchor A_l drawn once from an isotropic Gaussian.
Image embeddings scatter around the anchor with spread ``image_noise``; a
configurable fraction of them are "corrupted" — re-centered on the midpoint
between A_l and some other class's anchor — to mimic visually ambiguous
samples. Text embeddings scatter around A_l with the (typically smaller)
spread ``text_noise``, so their per-class means recover the anchors far
better than the image class-means do. That asymmetry is the regime where
pulling projected features toward the text centroids should pay off, and
the shipped default scenario is calibrated to sit inside it.

Generation is deterministic per seed with a fixed draw order: anchors
first, then train samples class by class, then test samples, each sample
drawing corruption target (if corrupted), image noise, then text noise.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .dataset import DatasetSplit, EmbeddingDataset, EmbeddingRecord, MAX_TEXT_EMBEDDINGS
from .numerics import SeededRng


class ScenarioConfigError(ValueError):
    """Invalid scenario: bad config syntax, unknown key, or bad value."""


@dataclass(frozen=True)
class SynthScenario:
    """Defaults are the shipped calibrated scenario."""

    n_classes: int = 6
    d_emb: int = 64
    train_per_class: int = 200
    test_per_class: int = 100
    class_anchor_spread: float = 0.3
    image_noise: float = 0.5
    image_corruption: float = 0.15
    text_noise: float = 0.15
    descriptions_per_sample: int = 10
    seed: int = 0

    def validate(self) -> None:
        if self.n_classes < 1:
            raise ScenarioConfigError(f"n_classes must be >= 1, got {self.n_classes}")
        if self.d_emb < 1:
            raise ScenarioConfigError(f"d_emb must be >= 1, got {self.d_emb}")
        if self.train_per_class < 1:
            raise ScenarioConfigError(
                f"train_per_class must be >= 1, got {self.train_per_class}"
            )
        if self.test_per_class < 1:
            raise ScenarioConfigError(f"test_per_class must be >= 1, got {self.test_per_class}")
        for name in ("class_anchor_spread", "image_noise", "text_noise"):
            value = getattr(self, name)
            if value < 0:
                raise ScenarioConfigError(f"{name} must be >= 0, got {value}")
        if not 0.0 <= self.image_corruption < 1.0:
            raise ScenarioConfigError(
                f"image_corruption must lie in [0, 1), got {self.image_corruption}"
            )
        if self.image_corruption > 0.0 and self.n_classes < 2:
            raise ScenarioConfigError("image_corruption > 0 requires at least 2 classes")
        if not 1 <= self.descriptions_per_sample <= MAX_TEXT_EMBEDDINGS:
            raise ScenarioConfigError(
                "descriptions_per_sample must lie in"
                f" [1, {MAX_TEXT_EMBEDDINGS}], got {self.descriptions_per_sample}"
            )
        if self.seed < 0:
            raise ScenarioConfigError(f"seed must be >= 0, got {self.seed}")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SynthScenario)}
_PARSERS = {"int": int, "float": float}


def parse_scenario_text(text: str, source: str = "<config>") -> SynthScenario:
    """Parse ``key = value`` lines (# comments, blank lines allowed)."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key or not value:
            raise ScenarioConfigError(
                f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        if key not in _FIELD_TYPES:
            known = ", ".join(sorted(_FIELD_TYPES))
            raise ScenarioConfigError(
                f"{source}:{lineno}: unknown scenario key {key!r} (known: {known})"
            )
        if key in values:
            raise ScenarioConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[_FIELD_TYPES[key]](value)
        except ValueError as exc:
            raise ScenarioConfigError(
                f"{source}:{lineno}: bad value for {key!r}: {exc}"
            ) from exc
    scenario = SynthScenario(**values)
    scenario.validate()
    return scenario


def load_scenario(path) -> SynthScenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read(), source=str(path))


def scenario_to_text(scenario: SynthScenario) -> str:
    lines = [f"{f.name} = {getattr(scenario, f.name)}" for f in dataclasses.fields(SynthScenario)]
    return "\n".join(lines) + "\n"


def default_scenario(seed: int = 0) -> SynthScenario:
    """The shipped calibrated scenario, with a caller-chosen seed."""
    return SynthScenario(seed=seed)


def _corrupt_count(rate: float, per_class: int) -> int:
    return int(math.floor(rate * per_class + 0.5))


def _generate_side(
    scenario: SynthScenario,
    anchors: np.ndarray,
    rng: SeededRng,
    role: str,
    per_class: int,
    class_names: list[str],
) -> EmbeddingDataset:
    d = scenario.d_emb
    k = scenario.descriptions_per_sample
    n_corrupt = _corrupt_count(scenario.image_corruption, per_class)
    records = []
    for label in range(scenario.n_classes):
        anchor = anchors[label]
        for s in range(per_class):
            if s < n_corrupt:
                offset = int(rng.integers(0, scenario.n_classes - 1))
                other = offset if offset < label else offset + 1
                base = 0.5 * (anchor + anchors[other])
            else:
                base = anchor
            image = base + rng.normal((d,), scale=scenario.image_noise)
            texts = anchor + rng.normal((k, d), scale=scenario.text_noise)
            records.append(
                EmbeddingRecord(
                    sample_id=f"{role}-{label:02d}-{s:05d}",
                    label=label,
                    image_embedding=image,
                    text_embeddings=[np.ascontiguousarray(t) for t in texts],
                )
            )
    ds = EmbeddingDataset(
        dimension=d,
        num_classes=scenario.n_classes,
        class_names=class_names,
        records=records,
    )
    ds.validate(require_all_classes=True)
    return ds


def generate(scenario: SynthScenario) -> tuple[DatasetSplit, np.ndarray]:
    """Generate a train/test split; also returns the true anchors.

    The same corruption fraction is applied to both splits, so the test
    distribution matches training (corrupted samples are genuinely
    ambiguous, not label noise: their texts still describe the true
    class). The anchors are ground truth for calibration checks and are
    not part of the datasets.
    """
    scenario.validate()
    rng = SeededRng(scenario.seed)
    anchors = rng.normal(
        (scenario.n_classes, scenario.d_emb), scale=scenario.class_anchor_spread
    )
    class_names = [f"class_{label:02d}" for label in range(scenario.n_classes)]
    train = _generate_side(
        scenario, anchors, rng, "train", scenario.train_per_class, class_names
    )
    test = _generate_side(
        scenario, anchors, rng, "test", scenario.test_per_class, class_names
    )
    split = DatasetSplit(train=train, test=test)
    split.validate()
    return split, anchors
