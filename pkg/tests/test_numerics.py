import numpy as np
import pytest

from centroid_reg import backend
from centroid_reg.numerics import (
    DimensionMismatchError,
    SeededRng,
    as_matrix,
    as_vector,
    matmul,
    softmax_rows,
    squared_l2_distance,
)

BACKENDS = ["numpy"] + (["numba"] if backend.NUMBA_AVAILABLE else [])


def test_as_matrix_coerces_lists_and_dtypes():
    m = as_matrix([[1, 2], [3, 4]])
    assert m.dtype == np.float64
    assert m.flags["C_CONTIGUOUS"]
    assert m.shape == (2, 2)


def test_as_matrix_rejects_wrong_rank():
    with pytest.raises(DimensionMismatchError):
        as_matrix([1.0, 2.0])
    with pytest.raises(DimensionMismatchError):
        as_vector([[1.0, 2.0]])


@pytest.mark.parametrize("name", BACKENDS)
def test_matmul_matches_numpy(name):
    rng = np.random.default_rng(42)
    with backend.use_backend(name):
        for _ in range(25):
            p, q, r = rng.integers(1, 12, size=3)
            a = rng.standard_normal((p, q))
            b = rng.standard_normal((q, r))
            got = matmul(a, b)
            assert got.shape == (p, r)
            np.testing.assert_allclose(got, a @ b, rtol=0, atol=1e-12)


def test_matmul_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatchError, match="inner dimensions"):
        matmul(np.zeros((2, 3)), np.zeros((4, 2)))


@pytest.mark.parametrize("name", BACKENDS)
def test_softmax_rows_sum_to_one_and_stay_stable(name):
    """Rows sum to 1 even when logits carry huge offsets (max-subtraction)."""
    rng = np.random.default_rng(7)
    with backend.use_backend(name):
        for _ in range(20):
            m = rng.standard_normal((5, 4)) + rng.choice([0.0, 1e5, -1e5])
            p = softmax_rows(m)
            assert np.all(p >= 0.0)
            np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12)


def test_softmax_rows_matches_longdouble_reference():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((8, 5)) * 10
    e = np.exp(m.astype(np.longdouble))
    ref = (e / e.sum(axis=1, keepdims=True)).astype(np.float64)
    np.testing.assert_allclose(softmax_rows(m), ref, rtol=0, atol=1e-14)


@pytest.mark.parametrize("name", BACKENDS)
def test_squared_l2_distance(name):
    rng = np.random.default_rng(11)
    with backend.use_backend(name):
        for _ in range(25):
            n = int(rng.integers(1, 30))
            x = rng.standard_normal(n)
            y = rng.standard_normal(n)
            ref = float(np.sum((x - y) ** 2))
            assert squared_l2_distance(x, y) == pytest.approx(ref, abs=1e-12)
    with pytest.raises(DimensionMismatchError):
        squared_l2_distance(np.zeros(3), np.zeros(4))


def test_backends_agree_closely():
    if not backend.NUMBA_AVAILABLE:
        pytest.skip("numba backend not importable")
    rng = np.random.default_rng(0)
    a = rng.standard_normal((17, 9))
    b = rng.standard_normal((9, 6))
    with backend.use_backend("numpy"):
        m_np = matmul(a, b)
        s_np = softmax_rows(m_np)
    with backend.use_backend("numba"):
        m_nb = matmul(a, b)
        s_nb = softmax_rows(m_nb)
    np.testing.assert_allclose(m_nb, m_np, rtol=0, atol=1e-12)
    np.testing.assert_allclose(s_nb, s_np, rtol=0, atol=1e-14)


def test_seeded_rng_is_reproducible():
    a = SeededRng(123)
    b = SeededRng(123)
    assert np.array_equal(a.normal((4, 3)), b.normal((4, 3)))
    assert np.array_equal(a.permutation(17), b.permutation(17))
    assert a.integers(0, 1000) == b.integers(0, 1000)


def test_seeded_rng_zero_scale_still_advances_stream():
    # scale=0 must consume the same draws as scale=1, so swapping a noise
    # level for zero cannot silently shift every later draw.
    a = SeededRng(5)
    a.normal((3,), scale=0.0)
    after_zero = a.normal((3,))
    b = SeededRng(5)
    b.normal((3,), scale=1.0)
    after_one = b.normal((3,))
    assert np.array_equal(after_zero, after_one)


def test_seeded_rng_zero_scale_yields_zeros():
    assert np.array_equal(SeededRng(9).normal((2, 2), scale=0.0), np.zeros((2, 2)))


def test_permutation_is_a_permutation():
    p = SeededRng(77).permutation(40)
    assert sorted(p.tolist()) == list(range(40))


def test_spawn_gives_independent_stream():
    parent = SeededRng(1)
    child = parent.spawn()
    assert not np.array_equal(parent.normal((8,)), child.normal((8,)))


def test_integers_respects_bounds():
    rng = SeededRng(2)
    draws = rng.integers(3, 7, size=200)
    assert draws.min() >= 3 and draws.max() < 7
