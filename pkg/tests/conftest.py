"""Session fixtures and the acceptance-criteria summary hook."""

from __future__ import annotations

import contextlib
import time

import pytest

import centroid_reg as cr

# Criterion name -> passed, in execution order. Filled by the `criterion`
# fixture, printed as one line each after the run.
_CRITERIA: dict[str, bool] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _CRITERIA.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


@pytest.fixture
def criterion():
    """Context manager that records an acceptance criterion's outcome."""

    @contextlib.contextmanager
    def _criterion(name: str):
        try:
            yield
        except BaseException:
            _CRITERIA[name] = False
            raise
        else:
            _CRITERIA[name] = True

    return _criterion


@pytest.fixture(scope="session")
def warm_kernels():
    """Trigger jit compilation once so timed tests measure steady state."""
    scenario = cr.SynthScenario(
        n_classes=2,
        d_emb=4,
        train_per_class=4,
        test_per_class=2,
        image_corruption=0.0,
        descriptions_per_sample=2,
        seed=0,
    )
    split, _ = cr.generate(scenario)
    cents = cr.compute_class_centroids(split.train)
    cr.train(split, cents, cr.TrainConfig(epochs=2, batch_size=4, seed=0))
    cr.train(split, cents, cr.TrainConfig(epochs=1, batch_size=4, optimizer="sgd"))


@pytest.fixture(scope="session")
def default_bundle():
    """The default synthetic scenario: (split, centroids, anchors)."""
    split, anchors = cr.generate(cr.default_scenario())
    cents = cr.compute_class_centroids(split.train)
    return split, cents, anchors


@pytest.fixture(scope="session")
def twenty_seed_reports(warm_kernels, default_bundle):
    """Both training arms across 20 training seeds, plus total wall time.

    Shared by the reproduction and compactness tests so the heavy runs
    happen once per session.
    """
    split, cents, _ = default_bundle
    start = time.perf_counter()
    reports = [
        cr.compare(split, cents, cr.TrainConfig(seed=seed)) for seed in range(20)
    ]
    elapsed = time.perf_counter() - start
    return reports, elapsed
