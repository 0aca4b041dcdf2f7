import numpy as np
import pytest

from centroid_reg import (
    Gradients,
    MetricHistory,
    OptimizerState,
    RegularizedHeadModel,
    SynthScenario,
    TrainConfig,
    TrainingDivergedError,
    adam_step,
    compute_class_centroids,
    evaluate,
    generate,
    sgd_step,
    train,
)
from centroid_reg.numerics import SeededRng


def separable_setup():
    """Two well-separated classes; trainable to perfect accuracy quickly."""
    scenario = SynthScenario(
        n_classes=2,
        d_emb=8,
        train_per_class=16,
        test_per_class=8,
        class_anchor_spread=2.0,
        image_noise=0.05,
        image_corruption=0.0,
        text_noise=0.02,
        descriptions_per_sample=4,
        seed=0,
    )
    split, _ = generate(scenario)
    return split, compute_class_centroids(split.train)


def one_param_model(w: float) -> RegularizedHeadModel:
    return RegularizedHeadModel(
        1, 1, 1, np.array([[w]]), np.zeros(1), np.zeros((1, 1)), np.zeros(1)
    )


def one_param_grads(g: float) -> Gradients:
    return Gradients(np.array([[g]]), np.zeros(1), np.zeros((1, 1)), np.zeros(1))


# ----------------------------------------------------------------- config


def test_config_defaults_validate():
    TrainConfig().validate()


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha": -1e-9},
        {"learning_rate": 0.0},
        {"batch_size": 0},
        {"epochs": 0},
        {"eval_every": 0},
        {"optimizer": "rmsprop"},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs).validate()


def test_with_alpha_changes_only_alpha():
    cfg = TrainConfig(alpha=0.5, seed=3)
    off = cfg.with_alpha(0.0)
    assert off.alpha == 0.0 and off.seed == 3 and off.epochs == cfg.epochs


# ------------------------------------------------------------- optimizers


def test_sgd_step_is_param_minus_lr_times_grad():
    model = one_param_model(1.0)
    sgd_step(model, one_param_grads(0.5), TrainConfig(optimizer="sgd", learning_rate=0.1))
    assert model.W1[0, 0] == 0.95


@pytest.mark.parametrize("g", [1e-3, -2.5, 7.0])
def test_adam_first_step_has_magnitude_lr(g):
    # after bias correction the first update is lr * g / (|g| + eps),
    # i.e. a step of size ~lr against the gradient sign
    model = one_param_model(0.0)
    state = OptimizerState.for_model(model)
    adam_step(model, one_param_grads(g), state, TrainConfig(learning_rate=1e-4))
    update = model.W1[0, 0]
    assert np.sign(update) == -np.sign(g)
    assert abs(update) / 1e-4 == pytest.approx(1.0, abs=1e-4)
    assert state.t == 1


def test_optimizers_reject_non_finite_gradients():
    model = one_param_model(0.0)
    with pytest.raises(TrainingDivergedError, match="W1"):
        sgd_step(model, one_param_grads(float("nan")), TrainConfig(optimizer="sgd"))
    with pytest.raises(TrainingDivergedError):
        adam_step(
            model,
            one_param_grads(float("inf")),
            OptimizerState.for_model(model),
            TrainConfig(),
        )


# --------------------------------------------------------------- evaluate


def test_evaluate_breaks_ties_toward_lowest_class():
    split, _ = separable_setup()
    zero = RegularizedHeadModel(
        8, 8, 2, np.zeros((8, 8)), np.zeros(8), np.zeros((2, 8)), np.zeros(2)
    )
    res = evaluate(zero, split.test)  # all logits equal -> always class 0
    assert res.per_class_accuracy == [1.0, 0.0]
    assert res.accuracy == 0.5
    assert res.correct == 8 and res.total == 16


def test_evaluate_reports_none_for_absent_classes():
    split, _ = separable_setup()
    only_zero = type(split.test)(
        split.test.dimension,
        split.test.num_classes,
        list(split.test.class_names),
        [r for r in split.test.records if r.label == 0],
    )
    zero = RegularizedHeadModel(
        8, 8, 2, np.zeros((8, 8)), np.zeros(8), np.zeros((2, 8)), np.zeros(2)
    )
    res = evaluate(zero, only_zero)
    assert res.per_class_accuracy == [1.0, None]


def test_evaluate_rejects_empty_dataset():
    split, _ = separable_setup()
    empty = type(split.test)(8, 2, list(split.test.class_names), [])
    model = RegularizedHeadModel.initialize(8, 8, 2, SeededRng(0))
    with pytest.raises(ValueError, match="empty"):
        evaluate(model, empty)


# ------------------------------------------------------------------ train


def test_training_is_bitwise_deterministic_per_seed():
    split, cents = separable_setup()
    cfg = TrainConfig(epochs=5, batch_size=8, seed=4)
    m1, h1 = train(split, cents, cfg)
    m2, h2 = train(split, cents, cfg)
    assert h1.equals_ignoring_time(h2)
    for (_, a), (_, b) in zip(m1.param_blocks(), m2.param_blocks()):
        assert np.array_equal(a, b)
    m3, h3 = train(split, cents, TrainConfig(epochs=5, batch_size=8, seed=5))
    assert not np.array_equal(m1.W2, m3.W2)
    assert not h1.equals_ignoring_time(h3)


def test_constructed_separable_instance_reaches_perfect_accuracy():
    split, cents = separable_setup()
    cfg = TrainConfig(
        alpha=0.0, learning_rate=0.05, batch_size=8, epochs=20, seed=0
    )
    model, history = train(split, cents, cfg)
    assert history.final_accuracy == 1.0
    assert evaluate(model, split.test).accuracy == 1.0
    assert len(history.rows) == 20
    assert [r.epoch for r in history.rows] == list(range(1, 21))


def test_history_rows_satisfy_loss_identity():
    split, cents = separable_setup()
    cfg = TrainConfig(alpha=0.03, epochs=4, batch_size=8, seed=1)
    _, history = train(split, cents, cfg)
    for row in history.rows:
        assert row.j_total == row.j_ce + cfg.alpha * row.j_reg
        assert row.j_reg >= 0.0
        assert row.mean_centroid_distance >= 0.0
        assert row.wall_time_ms >= 0.0


def test_eval_every_carries_accuracy_between_evaluations():
    split, cents = separable_setup()
    cfg = TrainConfig(epochs=5, batch_size=8, seed=2, eval_every=2)
    _, history = train(split, cents, cfg)
    rows = history.rows
    # epochs 1, 2, 4 and the final 5 evaluate; epoch 3 reuses epoch 2
    assert rows[2].test_accuracy == rows[1].test_accuracy


def test_short_final_batch_is_trained_on():
    split, cents = separable_setup()  # 32 train records
    cfg_full = TrainConfig(epochs=1, batch_size=32, seed=0)
    cfg_ragged = TrainConfig(epochs=1, batch_size=20, seed=0)  # 20 + 12
    _, h_full = train(split, cents, cfg_full)
    _, h_ragged = train(split, cents, cfg_ragged)
    # two updates instead of one must change the end-of-epoch losses
    assert h_full.rows[0].j_ce != h_ragged.rows[0].j_ce


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_raises_with_context():
    split, cents = separable_setup()
    cfg = TrainConfig(optimizer="sgd", learning_rate=1e300, epochs=3, batch_size=8)
    with pytest.raises(TrainingDivergedError, match="epoch 1"):
        train(split, cents, cfg)


def test_centroid_count_mismatch_is_rejected():
    split, cents = separable_setup()
    wrong = type(cents)(
        cents.num_classes + 1,
        cents.dimension,
        np.zeros((cents.num_classes + 1, cents.dimension)),
        np.ones(cents.num_classes + 1, dtype=np.int64),
    )
    with pytest.raises(Exception, match="classes"):
        train(split, wrong, TrainConfig(epochs=1))


# ---------------------------------------------------------------- history


def test_metric_history_csv_round_trip_is_exact(tmp_path):
    split, cents = separable_setup()
    _, history = train(split, cents, TrainConfig(epochs=3, batch_size=8, seed=6))
    path = tmp_path / "hist.csv"
    history.to_csv(path)
    back = MetricHistory.from_csv(path)
    assert back.rows == history.rows  # includes the wall-time column
    assert back.final_accuracy == history.final_accuracy
    assert back.best_accuracy == history.best_accuracy


def test_metric_history_rejects_unexpected_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("epoch,loss\n1,0.5\n")
    with pytest.raises(ValueError, match="header"):
        MetricHistory.from_csv(path)


def test_best_accuracy_is_running_maximum():
    h = MetricHistory()
    from centroid_reg import EpochMetrics

    for epoch, acc in enumerate([0.2, 0.9, 0.4], start=1):
        h.append(EpochMetrics(epoch, 1.0, 0.0, 1.0, acc, 0.0, 0.0))
    assert h.best_accuracy == 0.9
    assert h.final_accuracy == 0.4
