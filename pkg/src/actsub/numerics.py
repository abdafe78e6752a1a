"""Dense double-precision linear algebra primitives.

Everything here operates on plain 2-D float64 ndarrays and is a pure
function of its inputs. Products and factorizations dispatch through
`actsub.backend`; under the default numba backend the accumulation order
is fixed, so repeated calls on identical inputs are bitwise identical.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import backend


class EigenPair(NamedTuple):
    """Top eigenvalues (descending) and matching unit eigenvectors.

    ``vectors`` is d x r with column i paired to ``values[i]``. Each column
    is sign-fixed so its first entry of largest magnitude is nonnegative.
    """

    values: np.ndarray
    vectors: np.ndarray


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator with a pinned bit algorithm (PCG64).

    The algorithm is fixed explicitly rather than relying on NumPy's
    default so identical seeds give identical streams across platforms
    and NumPy versions.
    """
    return np.random.Generator(np.random.PCG64(seed))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D float64 array."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty, got shape {out.shape}")
    return out


def matmul(a, b) -> np.ndarray:
    """Matrix product with a deterministic accumulation order."""
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul dimension mismatch: {a.shape[0]}x{a.shape[1]} times "
            f"{b.shape[0]}x{b.shape[1]}"
        )
    return backend.matmul(np.ascontiguousarray(a), np.ascontiguousarray(b))


def fro_norm(a) -> float:
    """Frobenius norm: square root of the sum of squared entries."""
    a = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(np.sum(a * a)))


def qr_orthonormalize(a) -> np.ndarray:
    """Orthonormal basis for the column span of ``a`` (d x r, d >= r).

    Thin QR with the R diagonal forced nonnegative, which makes the result
    unique (hence deterministic) for full-rank input. Raises if a column is
    numerically dependent on the ones before it.
    """
    a = as_matrix(a)
    d, r = a.shape
    if d < r:
        raise ValueError(f"need rows >= cols for orthonormalization, got {d}x{r}")
    q, rdiag = backend.qr_nonneg(np.ascontiguousarray(a))
    col_norm_max = float(np.sqrt((a * a).sum(axis=0).max()))
    tol = 1e-12 * col_norm_max
    for j in range(r):
        if rdiag[j] == 0.0 or rdiag[j] < tol:
            raise ValueError(
                f"rank-deficient input: column {j} has R diagonal "
                f"{rdiag[j]:.3e} below tolerance {tol:.3e}"
            )
    return q


def sym_eig_topr(c, r: int) -> EigenPair:
    """Top-r eigenpairs of a symmetric matrix, eigenvalues descending.

    Full dense symmetric eigendecomposition (the matrices here are small),
    then the leading r pairs are selected. Ties in degenerate eigenspaces
    are resolved deterministically by the solver's fixed ordering plus the
    sign convention applied to every eigenvector.
    """
    c = as_matrix(c, "symmetric matrix")
    d = c.shape[0]
    if c.shape[1] != d:
        raise ValueError(f"expected a square matrix, got {c.shape}")
    if not 1 <= r <= d:
        raise ValueError(f"rank {r} out of range for dimension {d}")
    asym = float(np.abs(c - c.T).max())
    scale = float(np.abs(c).max())
    if asym > 1e-10 * max(scale, 1.0):
        raise ValueError(
            f"matrix is not symmetric: max asymmetry {asym:.3e} "
            f"(scale {scale:.3e})"
        )
    sym = (c + c.T) / 2.0
    values, vectors = np.linalg.eigh(sym)
    values = values[::-1][:r].copy()
    vectors = vectors[:, ::-1][:, :r].copy()
    for j in range(r):
        col = vectors[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0.0:
            vectors[:, j] = -col
    return EigenPair(values, vectors)


def spectral_norm_estimate(c, iters: int = 30) -> float:
    """Estimate of the largest eigenvalue magnitude of a symmetric matrix.

    Deterministic power iteration started from the largest-norm column of
    ``c`` itself. Returns 0 for the zero matrix.
    """
    c = as_matrix(c, "symmetric matrix")
    col_norms = np.sqrt((c * c).sum(axis=0))
    start = int(np.argmax(col_norms))
    if col_norms[start] == 0.0:
        return 0.0
    v = c[:, start] / col_norms[start]
    lam = 0.0
    for _ in range(iters):
        w = c @ v
        nw = float(np.sqrt(np.sum(w * w)))
        if nw == 0.0:
            return 0.0
        lam = nw
        v = w / nw
    return lam
