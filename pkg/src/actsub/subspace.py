"""Activation-subspace trackers and the subspace drift metric.

Three trackers share one interface: the online Oja tracker (normalized
step plus re-orthonormalization each call), a periodic-PCA baseline that
recomputes the basis from the current batch covariance every ``interval``
steps, and a fixed baseline that never updates. Every tracker step returns
the new basis together with the transition matrix mapping coordinates in
the previous basis to coordinates in the new one; the optimizer uses that
transition to transport its moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    as_matrix,
    fro_norm,
    matmul,
    qr_orthonormalize,
    spectral_norm_estimate,
    sym_eig_topr,
)

FROBENIUS = "frobenius"
SPECTRAL_ESTIMATE = "spectral-estimate"
NORM_KINDS = (FROBENIUS, SPECTRAL_ESTIMATE)


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal d x r basis plus the tracker step that produced it."""

    matrix: np.ndarray
    step: int = 0

    def __post_init__(self):
        m = as_matrix(self.matrix, "basis")
        object.__setattr__(self, "matrix", m)
        if m.shape[0] < m.shape[1]:
            raise ValueError(f"basis must be tall, got {m.shape}")

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class TransitionMatrix:
    """r x r change of coordinates between two successive bases.

    ``matrix`` is (new basis)^T (old basis); its singular values lie in
    [0, 1] up to roundoff because both factors have orthonormal columns.
    """

    matrix: np.ndarray
    source_step: int
    target_step: int


@dataclass(frozen=True)
class OjaConfig:
    """Oja tracker settings.

    gamma is the subspace learning rate; the applied step is gamma divided
    by the chosen norm of the batch covariance, so the update is invariant
    to activation scale. Updates are skipped entirely (identity transition)
    when the covariance norm is at or below ``norm_floor``, or when gamma
    is 0, which makes gamma=0 an exact fixed-basis degenerate case.
    """

    gamma: float
    norm_floor: float = 1e-30
    norm_kind: str = FROBENIUS

    def __post_init__(self):
        if not self.gamma >= 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.norm_floor >= 0.0:
            raise ValueError(f"norm_floor must be >= 0, got {self.norm_floor}")
        if self.norm_kind not in NORM_KINDS:
            raise ValueError(f"norm_kind must be one of {NORM_KINDS}")


@dataclass(frozen=True)
class OjaTracker:
    config: OjaConfig


@dataclass(frozen=True)
class PeriodicPcaTracker:
    interval: int

    def __post_init__(self):
        if self.interval < 1:
            raise ValueError(f"interval must be >= 1, got {self.interval}")


@dataclass(frozen=True)
class FixedTracker:
    pass


TrackerKind = OjaTracker | PeriodicPcaTracker | FixedTracker


def covariance_norm(c: np.ndarray, norm_kind: str) -> float:
    if norm_kind == FROBENIUS:
        return fro_norm(c)
    if norm_kind == SPECTRAL_ESTIMATE:
        return spectral_norm_estimate(c)
    raise ValueError(f"norm_kind must be one of {NORM_KINDS}")


def covariance(x) -> np.ndarray:
    """Batch covariance X^T X / N, exactly symmetric by construction."""
    from . import backend

    x = as_matrix(x, "activations")
    return backend.covariance(np.ascontiguousarray(x))


def init_basis(x0, rank: int) -> SubspaceBasis:
    """Initial basis: top-r eigenvectors of the first batch covariance."""
    x0 = as_matrix(x0, "initial activations")
    d = x0.shape[1]
    if not 1 <= rank <= d:
        raise ValueError(f"rank {rank} out of range for dimension {d}")
    if not np.any(x0):
        raise ValueError("cannot initialize a basis from all-zero activations")
    pair = sym_eig_topr(covariance(x0), rank)
    return SubspaceBasis(pair.vectors, step=0)


def _check_tracker_inputs(basis: SubspaceBasis, c: np.ndarray) -> np.ndarray:
    c = as_matrix(c, "covariance")
    d = basis.ambient_dim
    if c.shape != (d, d):
        raise ValueError(
            f"covariance shape {c.shape} does not match ambient dimension {d}"
        )
    if not np.isfinite(c).all():
        raise ValueError("covariance contains non-finite entries")
    return c


def _identity_transition(basis: SubspaceBasis, target_step: int) -> TransitionMatrix:
    return TransitionMatrix(
        np.eye(basis.rank), source_step=basis.step, target_step=target_step
    )


def oja_step(
    basis: SubspaceBasis, c, config: OjaConfig
) -> tuple[SubspaceBasis, TransitionMatrix]:
    """One normalized Oja update followed by re-orthonormalization.

    The basis is steered toward high-variance directions of ``c`` that are
    not yet captured, with step size gamma / ||c||. The transition matrix
    is computed from the re-orthonormalized basis, i.e. from the basis the
    rest of the step actually uses.
    """
    c = _check_tracker_inputs(basis, c)
    u = basis.matrix
    nrm = covariance_norm(c, config.norm_kind)
    new_step = basis.step + 1
    if config.gamma == 0.0 or nrm <= config.norm_floor:
        return (
            SubspaceBasis(u, step=new_step),
            _identity_transition(basis, new_step),
        )
    cu = matmul(c, u)
    residual = cu - matmul(u, matmul(u.T, cu))
    candidate = u + (config.gamma / nrm) * residual
    u_new = qr_orthonormalize(candidate)
    transition = TransitionMatrix(
        matmul(u_new.T, u), source_step=basis.step, target_step=new_step
    )
    new_basis = SubspaceBasis(u_new, step=new_step)
    assert basis_orthonormality_error(new_basis) < 1e-8
    return new_basis, transition


def periodic_pca_step(
    basis: SubspaceBasis, c, interval: int, t: int
) -> tuple[SubspaceBasis, TransitionMatrix]:
    """Baseline: recompute the basis from the current batch covariance
    whenever ``t`` is a multiple of ``interval``, otherwise keep it.

    Refreshes use batch statistics only; no running average is kept.
    """
    if interval < 1:
        raise ValueError(f"interval must be >= 1, got {interval}")
    c = _check_tracker_inputs(basis, c)
    new_step = basis.step + 1
    if t % interval != 0:
        return (
            SubspaceBasis(basis.matrix, step=new_step),
            _identity_transition(basis, new_step),
        )
    pair = sym_eig_topr(c, basis.rank)
    u_new = pair.vectors
    transition = TransitionMatrix(
        matmul(u_new.T, basis.matrix), source_step=basis.step, target_step=new_step
    )
    new_basis = SubspaceBasis(u_new, step=new_step)
    assert basis_orthonormality_error(new_basis) < 1e-8
    return new_basis, transition


def fixed_step(basis: SubspaceBasis) -> tuple[SubspaceBasis, TransitionMatrix]:
    """Baseline: never update; identity transition."""
    return basis, _identity_transition(basis, basis.step)


def tracker_step(
    kind: TrackerKind, basis: SubspaceBasis, c, t: int
) -> tuple[SubspaceBasis, TransitionMatrix, float]:
    """Dispatch one tracker step; also reports the effective Oja step size
    gamma / ||c|| actually applied (0 for the baselines and skipped steps).
    """
    if isinstance(kind, OjaTracker):
        new_basis, transition = oja_step(basis, c, kind.config)
        cfg = kind.config
        nrm = covariance_norm(np.asarray(c, dtype=np.float64), cfg.norm_kind)
        eff = 0.0 if (cfg.gamma == 0.0 or nrm <= cfg.norm_floor) else cfg.gamma / nrm
        return new_basis, transition, eff
    if isinstance(kind, PeriodicPcaTracker):
        new_basis, transition = periodic_pca_step(basis, c, kind.interval, t)
        return new_basis, transition, 0.0
    if isinstance(kind, FixedTracker):
        new_basis, transition = fixed_step(basis)
        return new_basis, transition, 0.0
    raise TypeError(f"unknown tracker kind: {kind!r}")


def drift(transition, rank: int | None = None) -> float:
    """Distance in [0, 1] between successive subspaces.

    sqrt(1 - ||T||_F^2 / r): 0 when the spans coincide (any in-span
    rotation of the basis included), 1 when they are orthogonal.

    The square root amplifies an eps-scale deficit in ||T||_F^2 to ~1e-8,
    so deficits at roundoff scale are snapped to exactly 0; identical spans
    report drift 0 rather than sqrt(roundoff).
    """
    t = transition.matrix if isinstance(transition, TransitionMatrix) else transition
    t = as_matrix(t, "transition")
    if rank is None:
        rank = t.shape[0]
    deficit = 1.0 - float(np.sum(t * t)) / rank
    if deficit <= 64.0 * rank * np.finfo(np.float64).eps:
        return 0.0
    return min(1.0, math.sqrt(deficit))


def basis_orthonormality_error(basis: SubspaceBasis | np.ndarray) -> float:
    """Frobenius norm of U^T U - I, the orthonormality defect."""
    u = basis.matrix if isinstance(basis, SubspaceBasis) else np.asarray(basis)
    gram = u.T @ u
    return fro_norm(gram - np.eye(u.shape[1]))


def principal_angles(a, b) -> np.ndarray:
    """Principal angles (radians, ascending) between two column spans.

    Inputs must have orthonormal columns. Computed from the singular values
    of a^T b; the last entry is the largest angle.
    """
    a = as_matrix(a, "first basis")
    b = as_matrix(b, "second basis")
    sv = np.linalg.svd(a.T @ b, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))
