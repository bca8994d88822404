"""Backend selection for the hot classical-oracle kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``LGKIT_PURE=1`` is set, the NumPy fallback is used.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("LGKIT_PURE") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def lg_string_extrema(n, ii, jj, coeff, offset=0.0, backend=None):
    impl = _pick(backend)
    return impl.lg_string_extrema(
        int(n),
        np.ascontiguousarray(ii, dtype=np.int64),
        np.ascontiguousarray(jj, dtype=np.int64),
        np.ascontiguousarray(coeff, dtype=float),
        float(offset),
    )


def ontic_sequence_joint(mu, xi, gamma, seq, backend=None) -> np.ndarray:
    impl = _pick(backend)
    return impl.ontic_sequence_joint(
        np.ascontiguousarray(mu, dtype=float),
        np.ascontiguousarray(xi, dtype=float),
        np.ascontiguousarray(gamma, dtype=float),
        np.ascontiguousarray(seq, dtype=np.int64),
    )


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {backend!r}")


def available_backends() -> list:
    out = ["python"]
    try:
        from . import _kernels  # noqa: F401
        out.append("cython")
    except ImportError:
        pass
    return out
