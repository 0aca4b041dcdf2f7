"""Selects between the numba-jitted kernels and the pure-numpy fallback.

The hot numeric kernels (fused train step, forward pass, losses, optimizer
updates) exist twice: ``_kernels_numba`` carries ``@njit`` loop kernels,
``_kernels_numpy`` carries vectorized numpy equivalents. Both expose the
same function names and produce numerically equivalent results; the test
suite cross-checks them.

The environment variable ``CENTROID_REG_BACKEND`` picks the active one:

    auto   (default) numba when importable, numpy otherwise
    numba  require the jitted kernels, fail loudly if numba is missing
    numpy  force the pure-numpy path

``select_backend`` / ``use_backend`` override the environment choice at
runtime (used by tests and the benchmark script).
"""

from __future__ import annotations

import contextlib
import os
from types import ModuleType

from . import _kernels_numpy

ENV_VAR = "CENTROID_REG_BACKEND"

try:
    from . import _kernels_numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _kernels_numba = None
    NUMBA_AVAILABLE = False

_active: ModuleType | None = None


class BackendError(RuntimeError):
    """Unknown backend name or a backend that cannot be provided."""


def _resolve(name: str) -> ModuleType:
    name = name.strip().lower()
    if name == "auto":
        return _kernels_numba if NUMBA_AVAILABLE else _kernels_numpy
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise BackendError("backend 'numba' requested but numba is not importable")
        return _kernels_numba
    raise BackendError(f"unknown backend {name!r} (expected auto, numba or numpy)")


def select_backend(name: str) -> None:
    """Pin the kernel backend for the rest of the process."""
    global _active
    _active = _resolve(name)


def kernels() -> ModuleType:
    """Return the active kernel module, resolving the env var on first use."""
    global _active
    if _active is None:
        _active = _resolve(os.environ.get(ENV_VAR, "auto"))
    return _active


def backend_name() -> str:
    return "numba" if kernels() is _kernels_numba else "numpy"


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch backends (test helper)."""
    global _active
    previous = _active
    select_backend(name)
    try:
        yield kernels()
    finally:
        _active = previous
