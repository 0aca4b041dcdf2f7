"""Centroid-regularized linear-head training over frozen embeddings.

Trains a projection plus classification head on precomputed image
embeddings under cross-entropy with an attraction term pulling each
projected sample toward its class centroid — the per-class mean of
text-description embeddings. Includes centroid computation, analytic
gradients with dual numba/numpy kernel backends, a synthetic testbed,
comparison/sweep experiment runners, binary dataset containers, and a
CLI.
"""

from .backend import (
    BackendError,
    NUMBA_AVAILABLE,
    backend_name,
    select_backend,
    use_backend,
)
from ._binio import (
    BadMagicError,
    ChecksumMismatchError,
    FormatError,
    TrailingBytesError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .dataset import (
    DatasetInvariantError,
    DatasetSplit,
    EmbeddingDataset,
    EmbeddingRecord,
    read_dataset,
    read_embd,
    read_jsonl,
    split_dataset,
    write_embd,
)
from .experiment import (
    ComparisonArm,
    ComparisonReport,
    SweepEntry,
    SweepResult,
    compare,
    report_to_dict,
    save_report,
    sweep_alpha,
    worker_count,
)
from .model import (
    Gradients,
    LossBreakdown,
    RegularizedHeadModel,
    backward,
    compute_losses,
    cross_entropy,
    forward,
    load_model,
    reg_loss,
    save_model,
    total_loss,
)
from .numerics import (
    DimensionMismatchError,
    SeededRng,
    matmul,
    softmax_rows,
    squared_l2_distance,
)
from .plotting import render_accuracy_plot
from .semantics import (
    ClassCentroids,
    compute_class_centroids,
    load_centroids,
    save_centroids,
)
from .synth import (
    ScenarioConfigError,
    SynthScenario,
    default_scenario,
    generate,
    load_scenario,
    parse_scenario_text,
    scenario_to_text,
)
from .trainer import (
    EpochMetrics,
    EvalResult,
    MetricHistory,
    OptimizerState,
    TrainConfig,
    TrainingDivergedError,
    adam_step,
    evaluate,
    sgd_step,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "BadMagicError",
    "ChecksumMismatchError",
    "ClassCentroids",
    "ComparisonArm",
    "ComparisonReport",
    "DatasetInvariantError",
    "DatasetSplit",
    "DimensionMismatchError",
    "EmbeddingDataset",
    "EmbeddingRecord",
    "EpochMetrics",
    "EvalResult",
    "FormatError",
    "Gradients",
    "LossBreakdown",
    "MetricHistory",
    "NUMBA_AVAILABLE",
    "OptimizerState",
    "RegularizedHeadModel",
    "ScenarioConfigError",
    "SeededRng",
    "SweepEntry",
    "SweepResult",
    "SynthScenario",
    "TrailingBytesError",
    "TrainConfig",
    "TrainingDivergedError",
    "TruncatedFileError",
    "UnsupportedVersionError",
    "adam_step",
    "backend_name",
    "backward",
    "compare",
    "compute_class_centroids",
    "compute_losses",
    "cross_entropy",
    "default_scenario",
    "evaluate",
    "forward",
    "generate",
    "load_centroids",
    "load_model",
    "load_scenario",
    "matmul",
    "parse_scenario_text",
    "read_dataset",
    "read_embd",
    "read_jsonl",
    "reg_loss",
    "render_accuracy_plot",
    "report_to_dict",
    "save_centroids",
    "save_model",
    "save_report",
    "scenario_to_text",
    "select_backend",
    "sgd_step",
    "softmax_rows",
    "split_dataset",
    "squared_l2_distance",
    "sweep_alpha",
    "total_loss",
    "train",
    "use_backend",
    "worker_count",
    "write_embd",
]
