"""Minimal training graph with compressed activation caching.

Linear layers keep their forward pass exact but cache only the rank-r
projection of their input activations for the backward pass, which yields
low-rank weight gradients directly in subspace coordinates. Includes toy
models, losses, and the analytic memory ledger.
"""

from .layers import (
    CompressedActivationCache,
    CompressedLinear,
    RawActivationCache,
    VectorParam,
    backward_linear,
    forward_linear,
    optimizer_step_linear,
)
from .ledger import LedgerEntry, MemoryLedger, baseline_report, ledger_document, ledger_report
from .losses import accuracy, mse_loss, softmax_xent
from .models import (
    Batch,
    LinearRegressionModel,
    Mlp2Model,
    NonFiniteLossError,
    SeqBlockModel,
    train_step,
)

__all__ = [
    "Batch",
    "CompressedActivationCache",
    "CompressedLinear",
    "LedgerEntry",
    "LinearRegressionModel",
    "MemoryLedger",
    "Mlp2Model",
    "NonFiniteLossError",
    "RawActivationCache",
    "SeqBlockModel",
    "VectorParam",
    "accuracy",
    "backward_linear",
    "baseline_report",
    "forward_linear",
    "ledger_document",
    "ledger_report",
    "mse_loss",
    "optimizer_step_linear",
    "softmax_xent",
    "train_step",
]
