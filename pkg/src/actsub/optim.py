"""Projection-aware low-rank Adam and the full-space Adam baseline.

The low-rank optimizer keeps its first and second moments in r x m
subspace coordinates. When the basis changes between steps, the moments
are transported through the r x r transition matrix before the usual Adam
recursion: the first moment maps linearly, while the second moment is
rebuilt from transported variance and mean-squared terms (coordinate-wise
second moments do not transform linearly). With an identity transition the
recursion reduces exactly to textbook Adam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, matmul
from .subspace import SubspaceBasis, TransitionMatrix


@dataclass(frozen=True)
class AdamHyper:
    eta: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError(f"beta2 must be in [0, 1), got {self.beta2}")
        if not self.eps > 0.0:
            raise ValueError(f"eps must be > 0, got {self.eps}")


@dataclass
class LowRankAdamState:
    """First/second moments in subspace coordinates plus the step count."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, rank: int, cols: int) -> "LowRankAdamState":
        return cls(m=np.zeros((rank, cols)), v=np.zeros((rank, cols)), step=0)


@dataclass
class FullAdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "FullAdamState":
        return cls(m=np.zeros((rows, cols)), v=np.zeros((rows, cols)), step=0)


def _as_transition(transition) -> np.ndarray:
    if isinstance(transition, TransitionMatrix):
        return transition.matrix
    return as_matrix(transition, "transition")


def lowrank_adam_step(
    state: LowRankAdamState,
    grad: np.ndarray,
    transition,
    hyper: AdamHyper,
) -> tuple[LowRankAdamState, np.ndarray]:
    """Advance the low-rank Adam state by one step.

    ``grad`` is the r x m subspace gradient and ``transition`` maps old
    basis coordinates to new ones. Returns the updated state and the
    normalized direction m_hat / (sqrt(v_hat) + eps); the caller scales by
    the step size and lifts it back to full space.

    The second-moment transport interprets the previous moments through
    their bias-corrected values, which is the reading that collapses to the
    standard Adam recursion when the transition is the identity. At the
    first step both transported terms are exactly zero because the moments
    start at zero.
    """
    grad = as_matrix(grad, "gradient")
    if not np.isfinite(grad).all():
        raise ValueError("non-finite gradient")
    tmat = _as_transition(transition)
    rank, cols = state.m.shape
    if grad.shape != (rank, cols):
        raise ValueError(
            f"gradient shape {grad.shape} does not match state {state.m.shape}"
        )
    if tmat.shape != (rank, rank):
        raise ValueError(
            f"transition shape {tmat.shape} does not match rank {rank}"
        )
    b1, b2 = hyper.beta1, hyper.beta2
    t = state.step + 1

    m_new = b1 * matmul(tmat, state.m) + (1.0 - b1) * grad
    if t == 1:
        v_new = (1.0 - b2) * grad * grad
    else:
        bc1_prev = 1.0 - b1 ** (t - 1)
        bc2_prev = 1.0 - b2 ** (t - 1)
        m_hat_prev = state.m / bc1_prev
        v_hat_prev = state.v / bc2_prev
        transported_mean = matmul(tmat, m_hat_prev)
        bracket = (
            matmul(tmat * tmat, v_hat_prev - m_hat_prev * m_hat_prev)
            + transported_mean * transported_mean
        )
        v_new = b2 * bc2_prev * np.abs(bracket) + (1.0 - b2) * grad * grad

    m_hat = m_new / (1.0 - b1**t)
    v_hat = v_new / (1.0 - b2**t)
    direction = m_hat / (np.sqrt(v_hat) + hyper.eps)
    new_state = LowRankAdamState(m=m_new, v=v_new, step=t)
    assert (new_state.v >= 0.0).all()
    return new_state, direction


def apply_update(w, basis, direction, eta: float) -> np.ndarray:
    """W minus eta times the direction lifted through the basis.

    The update matrix has rank at most r; directions outside the basis span
    are untouched.
    """
    w = as_matrix(w, "weights")
    u = basis.matrix if isinstance(basis, SubspaceBasis) else as_matrix(basis, "basis")
    direction = as_matrix(direction, "direction")
    if u.shape[0] != w.shape[0] or u.shape[1] != direction.shape[0]:
        raise ValueError(
            f"shape mismatch: weights {w.shape}, basis {u.shape}, "
            f"direction {direction.shape}"
        )
    if direction.shape[1] != w.shape[1]:
        raise ValueError(
            f"direction columns {direction.shape[1]} do not match weights "
            f"{w.shape}"
        )
    return w - eta * matmul(u, direction)


def full_adam_step(
    state: FullAdamState, grad: np.ndarray, hyper: AdamHyper
) -> tuple[FullAdamState, np.ndarray]:
    """Textbook Adam with bias correction; returns the additive update."""
    grad = as_matrix(grad, "gradient")
    if not np.isfinite(grad).all():
        raise ValueError("non-finite gradient")
    if grad.shape != state.m.shape:
        raise ValueError(
            f"gradient shape {grad.shape} does not match state {state.m.shape}"
        )
    b1, b2 = hyper.beta1, hyper.beta2
    t = state.step + 1
    m_new = b1 * state.m + (1.0 - b1) * grad
    v_new = b2 * state.v + (1.0 - b2) * grad * grad
    m_hat = m_new / (1.0 - b1**t)
    v_hat = v_new / (1.0 - b2**t)
    update = -hyper.eta * m_hat / (np.sqrt(v_hat) + hyper.eps)
    new_state = FullAdamState(m=m_new, v=v_new, step=t)
    assert (new_state.v >= 0.0).all()
    return new_state, update
