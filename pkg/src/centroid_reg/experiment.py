"""Baseline-vs-regularized comparison runs and alpha sweeps.

Both arms of a comparison share one seed, so initialization and shuffle
order are identical and the attraction weight is the only difference
between them. ``CENTROID_REG_THREADS`` (default 1) allows the two arms to
run on worker threads; results are identical either way because each arm
owns its RNG.
"""

from __future__ import annotations

import dataclasses
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ._binio import atomic_write
from .dataset import DatasetSplit
from .model import RegularizedHeadModel
from .semantics import ClassCentroids
from .trainer import MetricHistory, TrainConfig, train

THREADS_ENV_VAR = "CENTROID_REG_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(
            f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}"
        ) from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    return n


@dataclass
class ComparisonArm:
    alpha: float
    model: RegularizedHeadModel
    history: MetricHistory

    @property
    def final_accuracy(self) -> float:
        return self.history.final_accuracy

    @property
    def best_accuracy(self) -> float:
        return self.history.best_accuracy


@dataclass
class ComparisonReport:
    baseline: ComparisonArm
    regularized: ComparisonArm
    config: TrainConfig

    @property
    def delta_final(self) -> float:
        return self.regularized.final_accuracy - self.baseline.final_accuracy

    @property
    def delta_best(self) -> float:
        return self.regularized.best_accuracy - self.baseline.best_accuracy


def compare(
    split: DatasetSplit, centroids: ClassCentroids, config: TrainConfig
) -> ComparisonReport:
    """Train the alpha=0 baseline and the regularized arm on one seed."""
    config.validate()
    arm_configs = [config.with_alpha(0.0), config]
    if worker_count() >= 2:
        with ThreadPoolExecutor(max_workers=2) as pool:
            results = list(
                pool.map(lambda c: train(split, centroids, c), arm_configs)
            )
    else:
        results = [train(split, centroids, c) for c in arm_configs]
    arms = [
        ComparisonArm(alpha=c.alpha, model=m, history=h)
        for c, (m, h) in zip(arm_configs, results)
    ]
    return ComparisonReport(baseline=arms[0], regularized=arms[1], config=config)


def report_to_dict(
    report: ComparisonReport,
    baseline_history_path: str | None = None,
    regularized_history_path: str | None = None,
) -> dict:
    return {
        "baseline": {
            "final_acc": report.baseline.final_accuracy,
            "best_acc": report.baseline.best_accuracy,
            "history_path": baseline_history_path,
        },
        "regularized": {
            "final_acc": report.regularized.final_accuracy,
            "best_acc": report.regularized.best_accuracy,
            "history_path": regularized_history_path,
        },
        "delta_final": report.delta_final,
        "delta_best": report.delta_best,
        "config": dataclasses.asdict(report.config),
    }


def save_report(
    report: ComparisonReport,
    path,
    baseline_history_path: str | None = None,
    regularized_history_path: str | None = None,
) -> None:
    payload = report_to_dict(report, baseline_history_path, regularized_history_path)
    atomic_write(path, (json.dumps(payload, indent=2) + "\n").encode("utf-8"))


@dataclass(frozen=True)
class SweepEntry:
    alpha: float
    final_accuracy: float
    best_accuracy: float
    final_centroid_distance: float


@dataclass
class SweepResult:
    entries: list[SweepEntry]

    def to_csv(self, path) -> None:
        buf = io.StringIO()
        buf.write("alpha,final_accuracy,best_accuracy,final_centroid_distance\n")
        for e in self.entries:
            buf.write(
                f"{e.alpha!r},{e.final_accuracy!r},{e.best_accuracy!r},"
                f"{e.final_centroid_distance!r}\n"
            )
        atomic_write(path, buf.getvalue().encode("utf-8"))


def sweep_alpha(
    split: DatasetSplit,
    centroids: ClassCentroids,
    config: TrainConfig,
    alphas: list[float],
) -> SweepResult:
    """One full training run per alpha, all on config.seed."""
    if not alphas:
        raise ValueError("alpha sweep needs at least one value")
    for a in alphas:
        if a < 0:
            raise ValueError(f"sweep alphas must be >= 0, got {a}")
    entries = []
    for a in alphas:
        _, history = train(split, centroids, config.with_alpha(a))
        entries.append(
            SweepEntry(
                alpha=a,
                final_accuracy=history.final_accuracy,
                best_accuracy=history.best_accuracy,
                final_centroid_distance=history.final_centroid_distance,
            )
        )
    return SweepResult(entries=entries)
