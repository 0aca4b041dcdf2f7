"""Command-line entry points.

Exit codes: 0 success, 1 usage error (bad flags / unknown subcommand),
2 data or validation error. Every failure prints a single ``error: ...``
line to stderr. Output files are written atomically (temp file + rename),
and reruns with identical inputs and seed reproduce identical bytes,
except for wall-time columns in metric CSVs.

Training-related subcommands accept ``--config <file>`` with ``key =
value`` lines naming training-config fields; explicit flags win over the
file, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import re
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from ._binio import FormatError, atomic_write
from .backend import BackendError
from .dataset import (
    DatasetInvariantError,
    DatasetSplit,
    read_dataset,
    write_embd,
)
from .experiment import compare, save_report, sweep_alpha
from .model import load_model, save_model
from .plotting import CURVE_COLORS, render_accuracy_plot
from .semantics import compute_class_centroids, load_centroids, save_centroids
from .synth import (
    ScenarioConfigError,
    generate,
    load_scenario,
    parse_scenario_text,
)
from .trainer import (
    MetricHistory,
    TrainConfig,
    TrainingDivergedError,
    evaluate,
    train,
)

_DATA_ERRORS = (
    FormatError,
    DatasetInvariantError,
    ScenarioConfigError,
    TrainingDivergedError,
    BackendError,
    ValueError,
    OSError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_alphas(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("alpha list is empty")
    return values


_CONFIG_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
_KV_PARSERS = {"int": int, "float": float, "str": str}


def _train_config_from_file(path) -> TrainConfig:
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or not key or not value:
                raise ValueError(
                    f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"
                )
            if key not in _CONFIG_FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown training key {key!r}")
            if key in values:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = _KV_PARSERS[_CONFIG_FIELD_TYPES[key]](value)
            except ValueError as exc:
                raise ValueError(
                    f"{path}:{lineno}: bad value for {key!r}: {exc}"
                ) from exc
    return TrainConfig(**values)


def _add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value training config file")
    sub.add_argument("--alpha", type=float, help="attraction weight (default 1e-2)")
    sub.add_argument("--lr", type=float, help="learning rate (default 1e-4)")
    sub.add_argument("--batch", type=int, help="mini-batch size (default 64)")
    sub.add_argument("--epochs", type=int, help="training epochs (default 100)")
    sub.add_argument("--seed", type=int, help="RNG seed (default 0)")
    sub.add_argument("--optimizer", choices=("adam", "sgd"), help="default adam")
    sub.add_argument("--eval-every", type=int, help="epochs between test evals")


def _train_config(args) -> TrainConfig:
    config = _train_config_from_file(args.config) if args.config else TrainConfig()
    overrides = {
        "alpha": args.alpha,
        "learning_rate": args.lr,
        "batch_size": args.batch,
        "epochs": args.epochs,
        "seed": args.seed,
        "optimizer": args.optimizer,
        "eval_every": args.eval_every,
    }
    config = dataclasses.replace(
        config, **{k: v for k, v in overrides.items() if v is not None}
    )
    config.validate()
    return config


def _load_split(train_path, test_path) -> DatasetSplit:
    split = DatasetSplit(
        train=read_dataset(train_path), test=read_dataset(test_path)
    )
    split.validate()
    return split


def _resolve_scenario(name_or_path):
    """A packaged scenario name, unless an actual file shadows it."""
    if not Path(name_or_path).exists() and re.fullmatch(r"[\w-]+", name_or_path):
        packaged = resources.files("centroid_reg").joinpath(
            f"scenarios/{name_or_path}.cfg"
        )
        if packaged.is_file():
            return parse_scenario_text(
                packaged.read_text(encoding="utf-8"),
                source=f"packaged scenario {name_or_path!r}",
            )
    return load_scenario(name_or_path)


def _cmd_generate(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
        scenario.validate()
    split, _ = generate(scenario)
    write_embd(split.train, args.out_train)
    write_embd(split.test, args.out_test)
    print(f"wrote {args.out_train} ({len(split.train.records)} records)")
    print(f"wrote {args.out_test} ({len(split.test.records)} records)")
    return 0


def _cmd_centroids(args) -> int:
    train_ds = read_dataset(args.train)
    cents = compute_class_centroids(train_ds, normalize_text=args.normalize_text)
    save_centroids(cents, args.out)
    print(f"wrote {args.out} ({cents.num_classes} classes, dimension {cents.dimension})")
    return 0


def _cmd_train(args) -> int:
    config = _train_config(args)
    split = _load_split(args.train, args.test)
    cents = load_centroids(args.centroids)
    model, history = train(split, cents, config)
    save_model(model, args.out_model)
    history.to_csv(args.out_history)
    print(f"final_accuracy {history.final_accuracy!r}")
    print(f"best_accuracy {history.best_accuracy!r}")
    print(f"final_centroid_distance {history.final_centroid_distance!r}")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    ds = read_dataset(args.data)
    result = evaluate(model, ds)
    print(f"accuracy {result.accuracy!r} ({result.correct}/{result.total})")
    counts = ds.class_counts()
    for label, name in enumerate(ds.class_names):
        acc = result.per_class_accuracy[label]
        shown = "n/a" if acc is None else repr(acc)
        print(f"class {label} {name} accuracy {shown} ({counts[label]} samples)")
    return 0


def _cmd_compare(args) -> int:
    config = _train_config(args)
    split = _load_split(args.train, args.test)
    cents = load_centroids(args.centroids)
    report = compare(split, cents, config)
    report_path = Path(args.out_report)
    baseline_csv = report_path.with_name(report_path.stem + ".baseline_history.csv")
    regularized_csv = report_path.with_name(
        report_path.stem + ".regularized_history.csv"
    )
    report.baseline.history.to_csv(baseline_csv)
    report.regularized.history.to_csv(regularized_csv)
    save_report(report, report_path, str(baseline_csv), str(regularized_csv))
    print(f"baseline_final {report.baseline.final_accuracy!r}")
    print(f"regularized_final {report.regularized.final_accuracy!r}")
    print(f"delta_final {report.delta_final!r}")
    print(f"wrote {report_path}")
    return 0


def _cmd_sweep(args) -> int:
    config = _train_config(args)
    split = _load_split(args.train, args.test)
    cents = load_centroids(args.centroids)
    result = sweep_alpha(split, cents, config, args.alphas)
    result.to_csv(args.out)
    for entry in result.entries:
        print(f"alpha {entry.alpha!r} final_accuracy {entry.final_accuracy!r}")
    print(f"wrote {args.out}")
    return 0


def _cmd_inspect(args) -> int:
    ds = read_dataset(args.data)
    print(f"records {len(ds.records)}")
    print(f"dimension {ds.dimension}")
    print(f"num_classes {ds.num_classes}")
    counts = ds.class_counts()
    text_counts = ds.text_counts_per_class()
    for label, name in enumerate(ds.class_names):
        print(
            f"class {label} {name} samples {counts[label]}"
            f" text_embeddings {text_counts[label]}"
        )
    return 0


def _cmd_plot(args) -> int:
    if len(args.history) > len(CURVE_COLORS):
        raise ValueError(f"at most {len(CURVE_COLORS)} histories per plot")
    labels = list(args.label or [])
    if len(labels) > len(args.history):
        raise ValueError("more --label values than --history files")
    while len(labels) < len(args.history):
        labels.append(Path(args.history[len(labels)]).stem)
    curves = [
        (label, MetricHistory.from_csv(path))
        for label, path in zip(labels, args.history)
    ]
    atomic_write(args.out, render_accuracy_plot(curves).encode("utf-8"))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="centroid-reg",
        description=(
            "Train linear classification heads over frozen embeddings with a"
            " centroid-attraction regularizer, on synthetic or extracted data."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("generate", help="synthesize a train/test split")
    sub.add_argument(
        "--scenario",
        required=True,
        help="scenario config file, or a packaged scenario name (default)",
    )
    sub.add_argument("--seed", type=int, help="override the scenario seed")
    sub.add_argument("--out-train", required=True)
    sub.add_argument("--out-test", required=True)
    sub.set_defaults(handler=_cmd_generate)

    sub = subs.add_parser("centroids", help="compute per-class text centroids")
    sub.add_argument("--train", required=True, help="training dataset (embd/jsonl)")
    sub.add_argument("--out", required=True, help="output centroid file")
    sub.add_argument("--normalize-text", action="store_true")
    sub.set_defaults(handler=_cmd_centroids)

    sub = subs.add_parser("train", help="train one model")
    sub.add_argument("--train", required=True)
    sub.add_argument("--test", required=True)
    sub.add_argument("--centroids", required=True)
    _add_train_flags(sub)
    sub.add_argument("--out-model", required=True)
    sub.add_argument("--out-history", required=True)
    sub.set_defaults(handler=_cmd_train)

    sub = subs.add_parser("eval", help="evaluate a saved model")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    sub.set_defaults(handler=_cmd_eval)

    sub = subs.add_parser("compare", help="baseline vs regularized, one seed")
    sub.add_argument("--train", required=True)
    sub.add_argument("--test", required=True)
    sub.add_argument("--centroids", required=True)
    _add_train_flags(sub)
    sub.add_argument("--out-report", required=True, help="JSON report path")
    sub.set_defaults(handler=_cmd_compare)

    sub = subs.add_parser("sweep", help="one training run per alpha")
    sub.add_argument("--train", required=True)
    sub.add_argument("--test", required=True)
    sub.add_argument("--centroids", required=True)
    sub.add_argument(
        "--alphas", required=True, type=_parse_alphas, help="comma-separated list"
    )
    _add_train_flags(sub)
    sub.add_argument("--out", required=True, help="output CSV path")
    sub.set_defaults(handler=_cmd_sweep)

    sub = subs.add_parser("inspect", help="print dataset facts")
    sub.add_argument("--data", required=True)
    sub.set_defaults(handler=_cmd_inspect)

    sub = subs.add_parser("plot", help="accuracy-vs-epoch SVG from history CSVs")
    sub.add_argument(
        "--history", action="append", required=True, help="repeatable, up to 5"
    )
    sub.add_argument("--label", action="append", help="curve label (repeatable)")
    sub.add_argument("--out", required=True, help="output SVG path")
    sub.set_defaults(handler=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _DATA_ERRORS as exc:
        message = " ".join(str(exc).split()) or exc.__class__.__name__
        print(f"error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
