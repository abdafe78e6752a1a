"""Kernel backend selection.

The hot kernels (matmul, batch covariance, thin QR) exist twice: a
numba-jitted version with a fixed sequential accumulation order, and a
pure-NumPy fallback. The environment variable ``ACTSUB_BACKEND`` picks one:

    ACTSUB_BACKEND=numba   force the jitted kernels (error if numba missing)
    ACTSUB_BACKEND=numpy   force the NumPy fallback

Unset, the default is numba when importable, NumPy otherwise. The choice is
fixed at import time; ``benchmarks/bench_kernels.py`` compares both.
"""

import os

_VALID = ("numba", "numpy")


def _resolve() -> str:
    requested = os.environ.get("ACTSUB_BACKEND", "").strip().lower()
    if requested and requested not in _VALID:
        raise ValueError(
            f"ACTSUB_BACKEND={requested!r} is not one of {_VALID}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve()

if BACKEND == "numba":
    from . import _kernels_numba as _impl
else:
    from . import _kernels_numpy as _impl

matmul = _impl.matmul
covariance = _impl.covariance
qr_nonneg = _impl.qr_nonneg


def backend_name() -> str:
    return BACKEND
