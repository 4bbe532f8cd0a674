"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``COVLOGRANK_PURE=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

SIMPLE = _kernels_py.SIMPLE
PERMUTED_BLOCK = _kernels_py.PERMUTED_BLOCK
MINIMIZATION = _kernels_py.MINIMIZATION

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("COVLOGRANK_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def score_pass(time, event, arm, stratum, n_strata, theta, backend=None):
    """See ``_kernels_py.score_pass``."""
    impl = _pick(backend)
    return impl.score_pass(np.ascontiguousarray(time, dtype=np.float64), _i64(event),
                           _i64(arm), _i64(stratum), int(n_strata), float(theta))


def assign_sequence(kind, levels, stratum, uniforms, pi, n_ones, block_size,
                    p_prefer, n_cells, n_strata, backend=None):
    impl = _pick(backend)
    levels = _i64(levels)
    if levels.ndim != 2:
        levels = levels.reshape(len(uniforms), -1)
    return impl.assign_sequence(int(kind), levels, _i64(stratum),
                                np.ascontiguousarray(uniforms, dtype=np.float64),
                                float(pi), int(n_ones), int(block_size), float(p_prefer),
                                int(n_cells), int(n_strata))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        if BACKEND != "cython":
            raise ImportError("compiled kernels are not available")
        return _impl
    raise ValueError(f"unknown backend {backend!r}")
