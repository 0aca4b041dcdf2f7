"""Mini-batch training loop, evaluation, and optimizer steps.

One epoch is a full pass over a fresh seeded shuffle of the training set,
short final batch included. Defaults mirror the reference protocol:
batch size 64, learning rate 1e-4, 100 epochs, alpha 1e-2, Adam.

Everything stochastic (parameter init, shuffles) draws from a single
PCG64 stream seeded by the config, so a (config, data) pair fully
determines the resulting model and metric history; wall-clock columns are
the only nondeterministic output. The test split is touched exclusively
by ``evaluate``.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from ._binio import atomic_write
from .dataset import DatasetSplit, EmbeddingDataset
from .model import Gradients, RegularizedHeadModel, backward, forward
from .numerics import DimensionMismatchError, SeededRng
from .semantics import ClassCentroids

OPTIMIZERS = ("adam", "sgd")


class TrainingDivergedError(RuntimeError):
    """Loss or gradients went non-finite; carries epoch/batch context."""


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 1e-2
    learning_rate: float = 1e-4
    batch_size: int = 64
    epochs: int = 100
    seed: int = 0
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    eval_every: int = 1

    def validate(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(
                f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}"
            )

    def with_alpha(self, alpha: float) -> "TrainConfig":
        return replace(self, alpha=alpha)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    j_ce: float
    j_reg: float
    j_total: float
    test_accuracy: float
    mean_centroid_distance: float
    wall_time_ms: float


CSV_COLUMNS = (
    "epoch",
    "j_ce",
    "j_reg",
    "j_total",
    "test_accuracy",
    "mean_centroid_distance",
    "wall_time_ms",
)


@dataclass
class MetricHistory:
    rows: list[EpochMetrics] = field(default_factory=list)

    def append(self, row: EpochMetrics) -> None:
        self.rows.append(row)

    @property
    def final_accuracy(self) -> float:
        return self.rows[-1].test_accuracy

    @property
    def best_accuracy(self) -> float:
        return max(r.test_accuracy for r in self.rows)

    @property
    def final_centroid_distance(self) -> float:
        return self.rows[-1].mean_centroid_distance

    def equals_ignoring_time(self, other: "MetricHistory") -> bool:
        """Bitwise equality of everything except the wall-time column."""
        if len(self.rows) != len(other.rows):
            return False
        for a, b in zip(self.rows, other.rows):
            if (
                a.epoch != b.epoch
                or a.j_ce != b.j_ce
                or a.j_reg != b.j_reg
                or a.j_total != b.j_total
                or a.test_accuracy != b.test_accuracy
                or a.mean_centroid_distance != b.mean_centroid_distance
            ):
                return False
        return True

    def to_csv(self, path) -> None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(
                [
                    r.epoch,
                    repr(r.j_ce),
                    repr(r.j_reg),
                    repr(r.j_total),
                    repr(r.test_accuracy),
                    repr(r.mean_centroid_distance),
                    repr(r.wall_time_ms),
                ]
            )
        atomic_write(path, buf.getvalue().encode("utf-8"))

    @classmethod
    def from_csv(cls, path) -> "MetricHistory":
        history = cls()
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ValueError(f"unexpected metric CSV header in {path}: {header}")
            for row in reader:
                history.append(
                    EpochMetrics(
                        epoch=int(row[0]),
                        j_ce=float(row[1]),
                        j_reg=float(row[2]),
                        j_total=float(row[3]),
                        test_accuracy=float(row[4]),
                        mean_centroid_distance=float(row[5]),
                        wall_time_ms=float(row[6]),
                    )
                )
        return history


@dataclass
class OptimizerState:
    t: int
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]

    @classmethod
    def for_model(cls, model: RegularizedHeadModel) -> "OptimizerState":
        return cls(
            t=0,
            m={name: np.zeros_like(p) for name, p in model.param_blocks()},
            v={name: np.zeros_like(p) for name, p in model.param_blocks()},
        )


def _check_grads_finite(grads: Gradients) -> None:
    for name, g in grads.blocks():
        if not np.isfinite(g).all():
            raise TrainingDivergedError(f"non-finite gradient in block {name}")


def sgd_step(model: RegularizedHeadModel, grads: Gradients, config: TrainConfig) -> None:
    """Plain gradient descent update, in place."""
    _check_grads_finite(grads)
    k = backend.kernels()
    for (_, p), (_, g) in zip(model.param_blocks(), grads.blocks()):
        k.sgd_step(p.reshape(-1), g.reshape(-1), config.learning_rate)


def adam_step(
    model: RegularizedHeadModel,
    grads: Gradients,
    state: OptimizerState,
    config: TrainConfig,
) -> None:
    """Bias-corrected Adam update, in place; advances state.t."""
    _check_grads_finite(grads)
    state.t += 1
    k = backend.kernels()
    for (name, p), (_, g) in zip(model.param_blocks(), grads.blocks()):
        k.adam_step(
            p.reshape(-1),
            g.reshape(-1),
            state.m[name].reshape(-1),
            state.v[name].reshape(-1),
            state.t,
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_eps,
        )


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    per_class_accuracy: list[float | None]
    correct: int
    total: int


def evaluate(model: RegularizedHeadModel, ds: EmbeddingDataset) -> EvalResult:
    """Argmax-logit accuracy; ties break toward the lowest class index."""
    if not ds.records:
        raise ValueError("cannot evaluate on an empty dataset")
    X = ds.features()
    y = ds.labels()
    _, Z = forward(model, X)
    preds = np.argmax(Z, axis=1)
    correct = preds == y
    per_class: list[float | None] = []
    for label in range(ds.num_classes):
        mask = y == label
        if mask.any():
            per_class.append(float(correct[mask].mean()))
        else:
            per_class.append(None)
    return EvalResult(
        accuracy=float(correct.mean()),
        per_class_accuracy=per_class,
        correct=int(correct.sum()),
        total=int(y.size),
    )


def train(
    split: DatasetSplit, centroids: ClassCentroids, config: TrainConfig
) -> tuple[RegularizedHeadModel, MetricHistory]:
    """Run the full training protocol; deterministic given config.seed.

    With alpha = 0 this is exactly the unregularized baseline: the
    attraction term contributes nothing and the shuffles/init are
    unchanged, so baseline-vs-regularized comparisons isolate alpha.
    """
    config.validate()
    split.validate()
    if centroids.num_classes != split.train.num_classes:
        raise DimensionMismatchError(
            f"centroids cover {centroids.num_classes} classes,"
            f" dataset has {split.train.num_classes}"
        )

    rng = SeededRng(config.seed)
    model = RegularizedHeadModel.initialize(
        d_in=split.train.dimension,
        d_emb=centroids.dimension,
        n_classes=split.train.num_classes,
        rng=rng,
    )
    state = OptimizerState.for_model(model) if config.optimizer == "adam" else None

    X = split.train.features()
    y = split.train.labels()
    C = np.ascontiguousarray(centroids.centroids, dtype=np.float64)
    n = X.shape[0]
    kern = backend.kernels()

    history = MetricHistory()
    test_accuracy = float("nan")
    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        perm = rng.permutation(n)
        ce_sum = 0.0
        reg_sum = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start : start + config.batch_size]
            losses, grads = backward(model, X[idx], y[idx], centroids, config.alpha)
            if not np.isfinite(losses.j_total):
                raise TrainingDivergedError(
                    f"non-finite loss {losses.j_total} at epoch {epoch},"
                    f" batch {batch_index}"
                )
            if config.optimizer == "adam":
                adam_step(model, grads, state, config)
            else:
                sgd_step(model, grads, config)
            ce_sum += losses.j_ce * idx.size
            reg_sum += losses.j_reg * idx.size
        if not model.all_finite():
            raise TrainingDivergedError(f"non-finite parameters after epoch {epoch}")

        j_ce = ce_sum / n
        j_reg = reg_sum / n
        E, _ = forward(model, X)
        centroid_distance = float(kern.mean_centroid_distance(E, y, C))
        if epoch == 1 or epoch % config.eval_every == 0 or epoch == config.epochs:
            test_accuracy = evaluate(model, split.test).accuracy
        history.append(
            EpochMetrics(
                epoch=epoch,
                j_ce=j_ce,
                j_reg=j_reg,
                j_total=j_ce + config.alpha * j_reg,
                test_accuracy=test_accuracy,
                mean_centroid_distance=centroid_distance,
                wall_time_ms=(time.perf_counter() - started) * 1000.0,
            )
        )
    return model, history
