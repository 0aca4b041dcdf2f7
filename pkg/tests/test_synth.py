from importlib import resources

import numpy as np
import pytest

from centroid_reg import (
    ScenarioConfigError,
    SynthScenario,
    TrainConfig,
    compute_class_centroids,
    evaluate,
    generate,
    load_scenario,
    default_scenario,
    parse_scenario_text,
    scenario_to_text,
    train,
)


def tiny(**overrides) -> SynthScenario:
    base = dict(
        n_classes=3,
        d_emb=6,
        train_per_class=8,
        test_per_class=4,
        class_anchor_spread=1.0,
        image_noise=0.2,
        image_corruption=0.25,
        text_noise=0.1,
        descriptions_per_sample=3,
        seed=1,
    )
    base.update(overrides)
    return SynthScenario(**base)


def test_generation_is_deterministic():
    a, anchors_a = generate(tiny())
    b, anchors_b = generate(tiny())
    assert np.array_equal(anchors_a, anchors_b)
    assert a.train.equals(b.train) and a.test.equals(b.test)
    c, anchors_c = generate(tiny(seed=2))
    assert not np.array_equal(anchors_a, anchors_c)


def test_generated_shapes_roles_and_ids():
    split, anchors = generate(tiny())
    assert anchors.shape == (3, 6)
    assert split.train.class_counts() == [8, 8, 8]
    assert split.test.class_counts() == [4, 4, 4]
    assert all(r.sample_id.startswith("train-") for r in split.train.records)
    assert all(r.sample_id.startswith("test-") for r in split.test.records)
    assert split.train.class_names == ["class_00", "class_01", "class_02"]
    assert all(
        len(r.text_embeddings) == 3 for r in split.train.records + split.test.records
    )
    split.validate()


def test_corruption_blends_toward_another_class_anchor():
    """With zero image noise, corrupted images sit exactly on the midpoint
    between the true anchor and some other class's anchor."""
    scenario = tiny(
        n_classes=4,
        train_per_class=20,
        test_per_class=10,
        image_noise=0.0,
        image_corruption=0.15,
    )
    split, anchors = generate(scenario)
    for part, expected in ((split.train, 3), (split.test, 2)):
        for label in range(4):
            midpoints = 0
            for rec in part.records:
                if rec.label != label:
                    continue
                if np.array_equal(rec.image_embedding, anchors[label]):
                    continue
                assert any(
                    np.array_equal(
                        rec.image_embedding, 0.5 * (anchors[label] + anchors[other])
                    )
                    for other in range(4)
                    if other != label
                )
                midpoints += 1
            # floor(rate * per_class + 0.5) per class, same rule both splits
            assert midpoints == expected


def test_zero_corruption_means_images_equal_anchor_plus_noise():
    split, anchors = generate(tiny(image_noise=0.0, image_corruption=0.0))
    for rec in split.train.records:
        assert np.array_equal(rec.image_embedding, anchors[rec.label])


def test_noiseless_scenario_is_perfectly_learnable():
    # 8 samples x 2 descriptions = a power-of-two description count per
    # class, so even the mean is exact and centroids equal anchors bitwise
    scenario = tiny(
        image_noise=0.0,
        image_corruption=0.0,
        text_noise=0.0,
        descriptions_per_sample=2,
        seed=5,
    )
    split, anchors = generate(scenario)
    cents = compute_class_centroids(split.train)
    assert np.array_equal(cents.centroids, anchors)
    model, history = train(
        split, cents, TrainConfig(learning_rate=0.05, epochs=10, batch_size=8, seed=0)
    )
    assert history.final_accuracy == 1.0
    assert evaluate(model, split.test).accuracy == 1.0


def test_text_centroids_estimate_anchors_better_than_image_means(default_bundle):
    # the premise of the method: descriptions are a lower-variance view of
    # the class than the images themselves
    split, cents, anchors = default_bundle
    X = split.train.features()
    y = split.train.labels()
    for label in range(split.train.num_classes):
        image_mean = X[y == label].mean(axis=0)
        err_text = np.linalg.norm(cents.centroids[label] - anchors[label])
        err_image = np.linalg.norm(image_mean - anchors[label])
        assert err_text < err_image


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_classes": 0},
        {"d_emb": 0},
        {"train_per_class": 0},
        {"test_per_class": 0},
        {"class_anchor_spread": -0.1},
        {"image_noise": -1.0},
        {"text_noise": -0.5},
        {"image_corruption": -0.01},
        {"image_corruption": 1.0},
        {"descriptions_per_sample": 0},
        {"descriptions_per_sample": 256},
        {"seed": -1},
    ],
)
def test_scenario_validation_rejects(kwargs):
    with pytest.raises(ScenarioConfigError):
        tiny(**kwargs).validate()


def test_corruption_needs_a_second_class():
    with pytest.raises(ScenarioConfigError, match="class"):
        tiny(n_classes=1, image_corruption=0.1).validate()
    tiny(n_classes=1, image_corruption=0.0).validate()


# ------------------------------------------------------------ config text


def test_scenario_text_round_trip():
    s = tiny(seed=9)
    assert parse_scenario_text(scenario_to_text(s)) == s


def test_parse_accepts_comments_and_blank_lines():
    text = "\n# a scenario\n\nn_classes = 2\nd_emb = 4\n"
    s = parse_scenario_text(text)
    assert s.n_classes == 2 and s.d_emb == 4
    assert s.train_per_class == SynthScenario().train_per_class  # defaults kept


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("mystery = 3", "unknown"),
        ("n_classes = 2\nn_classes = 3", "duplicate"),
        ("n_classes = soon", "n_classes"),
        ("n_classes 2", "="),
    ],
)
def test_parse_errors_name_the_line(line, fragment):
    with pytest.raises(ScenarioConfigError, match=fragment) as exc:
        parse_scenario_text(line, source="test.cfg")
    assert "test.cfg" in str(exc.value)


def test_parse_runs_semantic_validation():
    with pytest.raises(ScenarioConfigError, match="image_noise"):
        parse_scenario_text("image_noise = -3")


def test_packaged_scenario_file_matches_defaults(tmp_path):
    text = (
        resources.files("centroid_reg")
        .joinpath("scenarios/default.cfg")
        .read_text(encoding="utf-8")
    )
    parsed = parse_scenario_text(text, source="default.cfg")
    assert parsed == SynthScenario() == default_scenario()
    path = tmp_path / "copy.cfg"
    path.write_text(text)
    assert load_scenario(path) == parsed


def test_default_scenario_seed_override():
    assert default_scenario(3).seed == 3
    assert default_scenario(3) == SynthScenario(seed=3)
