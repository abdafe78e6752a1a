"""Compressed linear layers and full-Adam vector parameters.

A compressed layer owns its weight matrix, its subspace tracker state, and
its low-rank optimizer state. The forward pass computes X W from the full
activations (exact), advances the tracker on the batch covariance, and
caches only the projected activations; the full activations are not
retained. The backward pass produces the exact input gradient and the
subspace weight gradient, never materializing the full d x m gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import as_matrix, matmul
from ..optim import (
    AdamHyper,
    FullAdamState,
    LowRankAdamState,
    apply_update,
    full_adam_step,
    lowrank_adam_step,
)
from ..subspace import (
    SubspaceBasis,
    TrackerKind,
    TransitionMatrix,
    covariance,
    drift,
    init_basis,
    tracker_step,
)


@dataclass
class CompressedActivationCache:
    """Projected activations X U (N x r) held between forward and backward."""

    projected: np.ndarray
    batch_size: int
    seq_len: int

    @property
    def rows(self) -> int:
        return self.projected.shape[0]


@dataclass
class RawActivationCache:
    """Uncompressed activations, used by layers that opt out of compression."""

    activations: np.ndarray
    batch_size: int
    seq_len: int

    @property
    def rows(self) -> int:
        return self.activations.shape[0]


class CompressedLinear:
    """State for one linear layer with compressed activation caching.

    ``compress=False`` opts the layer out: it then caches full activations
    and trains with full-space Adam, which is also the baseline the memory
    ledger compares against.
    """

    def __init__(
        self,
        name: str,
        weight: np.ndarray,
        rank: int,
        tracker: TrackerKind,
        compress: bool = True,
    ):
        self.name = name
        self.weight = as_matrix(weight, f"{name} weight")
        d = self.weight.shape[0]
        if not 1 <= rank <= d:
            raise ValueError(f"layer {name}: rank {rank} out of range for dim {d}")
        self.rank = rank
        self.tracker = tracker
        self.compress = compress
        self.basis: SubspaceBasis | None = None
        self.opt_lowrank: LowRankAdamState | None = None
        self.opt_full: FullAdamState | None = None
        self.cache: CompressedActivationCache | RawActivationCache | None = None
        self.pending_transition: TransitionMatrix | None = None
        self.pending_grad: np.ndarray | None = None
        self.train_steps = 0
        self.last_rows = 0
        self.last_drift = 0.0
        self.last_gamma_eff = 0.0

    @property
    def dim_in(self) -> int:
        return self.weight.shape[0]

    @property
    def dim_out(self) -> int:
        return self.weight.shape[1]

    def initialize_basis(self, x0: np.ndarray) -> None:
        """Set the initial basis from the first batch of activations."""
        if self.compress:
            self.basis = init_basis(x0, self.rank)
            self.opt_lowrank = LowRankAdamState.zeros(self.rank, self.dim_out)
        else:
            self.opt_full = FullAdamState.zeros(self.dim_in, self.dim_out)

    def set_basis(self, basis: SubspaceBasis) -> None:
        """Inject a basis directly (tests and the identity reduction case)."""
        if basis.ambient_dim != self.dim_in or basis.rank != self.rank:
            raise ValueError(
                f"layer {self.name}: basis {basis.matrix.shape} does not match "
                f"dim {self.dim_in}, rank {self.rank}"
            )
        self.basis = basis
        self.opt_lowrank = LowRankAdamState.zeros(self.rank, self.dim_out)

    @property
    def initialized(self) -> bool:
        if self.compress:
            return self.basis is not None
        return self.opt_full is not None


def forward_linear(
    layer: CompressedLinear,
    x: np.ndarray,
    batch_shape: tuple[int, int] | None = None,
) -> np.ndarray:
    """Exact forward product Y = X W, with tracker and cache side effects.

    For a compressed layer this advances the subspace tracker on the batch
    covariance of X, stores the projection of X onto the fresh basis, and
    records the transition matrix for the optimizer. X itself is dropped.
    """
    x = as_matrix(x, f"{layer.name} input")
    if layer.cache is not None:
        raise RuntimeError(
            f"layer {layer.name}: forward with a pending cache "
            "(missing backward for the previous batch)"
        )
    if x.shape[1] != layer.dim_in:
        raise ValueError(
            f"layer {layer.name}: input has {x.shape[1]} features, "
            f"expected {layer.dim_in}"
        )
    if not layer.initialized:
        raise RuntimeError(f"layer {layer.name}: basis not initialized")
    rows = x.shape[0]
    if batch_shape is None:
        batch_shape = (rows, 1)
    if batch_shape[0] * batch_shape[1] != rows:
        raise ValueError(
            f"layer {layer.name}: batch shape {batch_shape} does not "
            f"factor {rows} rows"
        )
    y = matmul(x, layer.weight)

    layer.train_steps += 1
    if layer.compress:
        cov = covariance(x)
        basis, transition, gamma_eff = tracker_step(
            layer.tracker, layer.basis, cov, layer.train_steps
        )
        layer.basis = basis
        layer.pending_transition = transition
        layer.last_drift = drift(transition, layer.rank)
        layer.last_gamma_eff = gamma_eff
        layer.cache = CompressedActivationCache(
            matmul(x, basis.matrix), batch_shape[0], batch_shape[1]
        )
    else:
        layer.cache = RawActivationCache(x.copy(), batch_shape[0], batch_shape[1])
    layer.last_rows = rows
    return y


def backward_linear(
    layer: CompressedLinear, g_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Consume the cache and return (input gradient, weight gradient).

    The input gradient G W^T is exact at any rank (it never needs the
    cached activations). The weight gradient is returned in subspace
    coordinates for a compressed layer; its lift through the basis is the
    orthogonal projection of the true gradient X^T G onto the basis span.
    """
    g_out = as_matrix(g_out, f"{layer.name} output gradient")
    if layer.cache is None:
        raise RuntimeError(f"layer {layer.name}: backward without a cached forward")
    if g_out.shape != (layer.cache.rows, layer.dim_out):
        raise ValueError(
            f"layer {layer.name}: output gradient shape {g_out.shape}, "
            f"expected {(layer.cache.rows, layer.dim_out)}"
        )
    if not np.isfinite(g_out).all():
        raise ValueError(f"layer {layer.name}: non-finite output gradient")
    g_in = matmul(g_out, np.ascontiguousarray(layer.weight.T))
    if layer.compress:
        g_w = matmul(np.ascontiguousarray(layer.cache.projected.T), g_out)
    else:
        g_w = matmul(np.ascontiguousarray(layer.cache.activations.T), g_out)
    layer.cache = None
    layer.pending_grad = g_w
    return g_in, g_w


def optimizer_step_linear(layer: CompressedLinear, hyper: AdamHyper) -> None:
    """Advance the layer's optimizer with the gradient from backward."""
    if layer.pending_grad is None:
        raise RuntimeError(f"layer {layer.name}: optimizer step without a gradient")
    if layer.compress:
        try:
            layer.opt_lowrank, direction = lowrank_adam_step(
                layer.opt_lowrank, layer.pending_grad, layer.pending_transition, hyper
            )
        except ValueError as err:
            raise ValueError(f"layer {layer.name}: {err}") from err
        layer.weight = apply_update(layer.weight, layer.basis, direction, hyper.eta)
        layer.pending_transition = None
    else:
        try:
            layer.opt_full, update = full_adam_step(
                layer.opt_full, layer.pending_grad, hyper
            )
        except ValueError as err:
            raise ValueError(f"layer {layer.name}: {err}") from err
        layer.weight = layer.weight + update
    layer.pending_grad = None


class VectorParam:
    """A parameter trained with full Adam (biases, embeddings, gains)."""

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = as_matrix(value, name)
        self.opt = FullAdamState.zeros(*self.value.shape)
        self.pending_grad: np.ndarray | None = None

    def optimizer_step(self, hyper: AdamHyper) -> None:
        if self.pending_grad is None:
            raise RuntimeError(f"param {self.name}: optimizer step without a gradient")
        try:
            self.opt, update = full_adam_step(self.opt, self.pending_grad, hyper)
        except ValueError as err:
            raise ValueError(f"param {self.name}: {err}") from err
        self.value = self.value + update
        self.pending_grad = None
