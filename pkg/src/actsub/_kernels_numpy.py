"""Pure-NumPy fallback kernels.

Shape-for-shape equivalents of the numba kernels, backed by BLAS/LAPACK.
Results agree with the numba backend to floating-point roundoff (the
accumulation order differs), and are deterministic run-to-run on a fixed
NumPy build.
"""

import numpy as np


def matmul(a, b):
    return a @ b


def covariance(x):
    c = (x.T @ x) / x.shape[0]
    return (c + c.T) / 2.0


def qr_nonneg(a):
    q, r = np.linalg.qr(a, mode="reduced")
    rdiag = np.diag(r).copy()
    flip = rdiag < 0.0
    if flip.any():
        q = q.copy()
        q[:, flip] = -q[:, flip]
    return q, np.abs(rdiag)
