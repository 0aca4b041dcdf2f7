"""Dense linear-algebra substrate and the seeded random generator.

A "matrix" throughout this package is a 2-D C-contiguous float64 numpy
array; vectors are 1-D float64 arrays. The functions here validate shapes
and finiteness, then dispatch to the active kernel backend (numba or
numpy, see ``backend``). Everything is a pure function; results for a
given input do not depend on call order or thread.

Randomness comes exclusively from ``SeededRng``, a thin wrapper over
numpy's PCG64. PCG64 is the pinned generator: numpy guarantees the
stream for a given seed is stable across platforms and releases, which is
what makes every training run, split and synthetic dataset in this
package reproducible from its integer seed alone.
"""

from __future__ import annotations

import numpy as np

from . import backend


class DimensionMismatchError(ValueError):
    """Operands whose shapes cannot be combined; message names both shapes."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D C-contiguous float64 array, validating rank."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    return m

def as_vector(a, name: str = "vector") -> np.ndarray:
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-D, got shape {v.shape}")
    return v


def matmul(a, b) -> np.ndarray:
    """Matrix product with 64-bit accumulation."""
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}:"
            " inner dimensions differ"
        )
    return backend.kernels().matmul(a, b)


def softmax_rows(m) -> np.ndarray:
    """Row-wise softmax with max-subtraction; each row sums to 1."""
    m = as_matrix(m)
    return backend.kernels().softmax_rows(m)


def squared_l2_distance(x, y) -> float:
    """Sum of squared differences between two equal-length vectors."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}"
        )
    return float(backend.kernels().squared_l2_distance(x, y))


class SeededRng:
    """Deterministic random source: numpy PCG64 behind a fixed draw API.

    The draw methods below are the only ones the package uses, and their
    call order is fixed by the callers, so a seed pins every stochastic
    choice (parameter init noise, epoch shuffles, synthetic data).
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def normal(self, shape, scale: float = 1.0) -> np.ndarray:
        """Gaussian draws with mean 0; always consumes the stream, even at scale 0."""
        return self._gen.standard_normal(shape) * scale

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def spawn(self) -> "SeededRng":
        """Child generator seeded from this stream, for independent substreams."""
        return SeededRng(int(self._gen.integers(0, 2**63 - 1)))
