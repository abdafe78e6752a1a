"""Numba-compiled hot kernels.

Every kernel uses a fixed sequential loop order (no prange, no fastmath),
so results are bitwise reproducible for identical inputs. This is the
default backend; see `actsub.backend` for selection.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def matmul(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    for i in range(n):
        for p in range(k):
            aip = a[i, p]
            for j in range(m):
                out[i, j] += aip * b[p, j]
    return out


@njit(cache=True)
def covariance(x):
    n, d = x.shape
    c = np.zeros((d, d))
    for t in range(n):
        for i in range(d):
            xi = x[t, i]
            for j in range(i, d):
                c[i, j] += xi * x[t, j]
    inv = 1.0 / n
    for i in range(d):
        for j in range(i, d):
            c[i, j] *= inv
            c[j, i] = c[i, j]
    return c


@njit(cache=True)
def qr_nonneg(a):
    """Thin Householder QR with the R diagonal forced nonnegative.

    Returns (q, rdiag) where q is d x r with orthonormal columns and
    rdiag[j] >= 0 is the magnitude of the j-th R diagonal entry (used by
    callers for rank checks).
    """
    d, r = a.shape
    red = a.copy()
    vs = np.zeros((d, r))
    vnorm2 = np.zeros(r)
    rdiag = np.zeros(r)
    neg = np.zeros(r, dtype=np.bool_)

    for j in range(r):
        s = 0.0
        for i in range(j, d):
            s += red[i, j] * red[i, j]
        normx = np.sqrt(s)
        rdiag[j] = normx
        if normx == 0.0:
            continue
        x0 = red[j, j]
        alpha = -normx if x0 >= 0.0 else normx
        neg[j] = alpha < 0.0
        v0 = x0 - alpha
        vs[j, j] = v0
        vn2 = v0 * v0
        for i in range(j + 1, d):
            vs[i, j] = red[i, j]
            vn2 += red[i, j] * red[i, j]
        vnorm2[j] = vn2
        if vn2 == 0.0:
            continue
        for c in range(j, r):
            dot = 0.0
            for i in range(j, d):
                dot += vs[i, j] * red[i, c]
            coef = 2.0 * dot / vn2
            for i in range(j, d):
                red[i, c] -= coef * vs[i, j]

    q = np.zeros((d, r))
    for j in range(r):
        q[j, j] = 1.0
    for j in range(r - 1, -1, -1):
        if vnorm2[j] == 0.0:
            continue
        for c in range(r):
            dot = 0.0
            for i in range(j, d):
                dot += vs[i, j] * q[i, c]
            coef = 2.0 * dot / vnorm2[j]
            for i in range(j, d):
                q[i, c] -= coef * vs[i, j]

    # Householder puts -sign(x0)*normx on the diagonal; flip columns so the
    # implied R diagonal is +normx, making q unique for full-rank input.
    for j in range(r):
        if neg[j]:
            for i in range(d):
                q[i, j] = -q[i, j]
    return q, rdiag
