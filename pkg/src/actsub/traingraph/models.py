"""Toy models wired through the compressed training graph.

Three desk-scale models: a single-layer linear regression, a two-layer
tanh MLP classifier, and a character-sequence block (embedding, hidden
layer, readout over the vocabulary). All matrix weights train through
compressed linear layers; vector parameters (biases) and the embedding
table train with full Adam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import as_matrix, matmul
from ..optim import AdamHyper
from ..subspace import SubspaceBasis, TrackerKind
from .layers import (
    CompressedLinear,
    VectorParam,
    backward_linear,
    forward_linear,
    optimizer_step_linear,
)
from .ledger import (
    LedgerEntry,
    MemoryLedger,
    ledger_report,
    linear_entry,
    stored_activation_entry,
    vector_entry,
)
from .losses import accuracy, mse_loss, softmax_xent


class NonFiniteLossError(RuntimeError):
    def __init__(self, step: int, value: float):
        super().__init__(f"non-finite loss {value!r} at train step {step}")
        self.step = step
        self.value = value


@dataclass
class Batch:
    inputs: np.ndarray
    targets: np.ndarray


def _check_finite_loss(model, loss: float) -> None:
    if not np.isfinite(loss):
        raise NonFiniteLossError(model.global_step, loss)


class LinearRegressionModel:
    """Y = X W with mean-squared-error loss; one compressed layer."""

    def __init__(
        self,
        dim_in: int,
        dim_out: int,
        rank: int,
        tracker: TrackerKind,
        rng: np.random.Generator,
        compress: bool = True,
        elem_size: int = 2,
    ):
        weight = rng.uniform(-1.0, 1.0, (dim_in, dim_out)) / np.sqrt(dim_in)
        self.layer = CompressedLinear("linear", weight, rank, tracker, compress)
        self.global_step = 0
        self.elem_size = elem_size

    def initialize(self, batch: Batch) -> None:
        self.layer.initialize_basis(as_matrix(batch.inputs))

    def initialize_identity(self) -> None:
        """Full-rank identity basis: the exact full-Adam reduction case."""
        if self.layer.rank != self.layer.dim_in:
            raise ValueError("identity initialization requires rank == dim_in")
        self.layer.set_basis(SubspaceBasis(np.eye(self.layer.dim_in)))

    @property
    def initialized(self) -> bool:
        return self.layer.initialized

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return matmul(inputs, self.layer.weight)

    def evaluate_loss(self, batch: Batch) -> float:
        return mse_loss(self.predict(batch.inputs), batch.targets)[0]

    def eval_metric(self, batch: Batch) -> float:
        return self.evaluate_loss(batch)

    def train_step(self, batch: Batch, hyper: AdamHyper) -> tuple[float, MemoryLedger]:
        pred = forward_linear(self.layer, batch.inputs)
        loss, g_out = mse_loss(pred, batch.targets)
        self.global_step += 1
        _check_finite_loss(self, loss)
        backward_linear(self.layer, g_out)
        optimizer_step_linear(self.layer, hyper)
        return loss, ledger_report(self)

    def gradients(self, batch: Batch) -> dict[str, np.ndarray]:
        """Materialized weight gradients without touching the weights."""
        pred = forward_linear(self.layer, batch.inputs)
        _, g_out = mse_loss(pred, batch.targets)
        _, g_w = backward_linear(self.layer, g_out)
        self.layer.pending_grad = None
        self.layer.pending_transition = None
        if self.layer.compress:
            g_w = matmul(self.layer.basis.matrix, g_w)
        return {"linear": g_w}

    def compressed_layers(self) -> list[CompressedLinear]:
        return [self.layer] if self.layer.compress else []

    def ledger_entries(self, compressed: bool) -> list[LedgerEntry]:
        return [linear_entry(self.layer, self.elem_size, compressed)]


class Mlp2Model:
    """Two compressed linear layers with a tanh in between; softmax loss.

    The requested rank is capped at each layer's input width, so a rank of
    max(dim_in, hidden) runs both layers at full rank. The tanh output is
    kept uncompressed for its backward pass and is accounted as its own
    ledger entry.
    """

    def __init__(
        self,
        dim_in: int,
        hidden: int,
        classes: int,
        rank: int,
        tracker: TrackerKind,
        rng: np.random.Generator,
        compress: bool = True,
        elem_size: int = 2,
    ):
        w1 = rng.uniform(-1.0, 1.0, (dim_in, hidden)) / np.sqrt(dim_in)
        w2 = rng.uniform(-1.0, 1.0, (hidden, classes)) / np.sqrt(hidden)
        self.lin1 = CompressedLinear("linear1", w1, min(rank, dim_in), tracker, compress)
        self.lin2 = CompressedLinear("linear2", w2, min(rank, hidden), tracker, compress)
        self.bias1 = VectorParam("linear1.bias", np.zeros((1, hidden)))
        self.bias2 = VectorParam("linear2.bias", np.zeros((1, classes)))
        self.hidden = hidden
        self.global_step = 0
        self.elem_size = elem_size

    def initialize(self, batch: Batch) -> None:
        x = as_matrix(batch.inputs)
        self.lin1.initialize_basis(x)
        h = np.tanh(matmul(x, self.lin1.weight) + self.bias1.value)
        self.lin2.initialize_basis(h)

    @property
    def initialized(self) -> bool:
        return self.lin1.initialized and self.lin2.initialized

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        h = np.tanh(matmul(inputs, self.lin1.weight) + self.bias1.value)
        return matmul(h, self.lin2.weight) + self.bias2.value

    def evaluate_loss(self, batch: Batch) -> float:
        return softmax_xent(self.predict(batch.inputs), batch.targets)[0]

    def eval_metric(self, batch: Batch) -> float:
        return accuracy(self.predict(batch.inputs), batch.targets)

    def _backward(self, h: np.ndarray, g_logits: np.ndarray) -> None:
        self.bias2.pending_grad = g_logits.sum(axis=0, keepdims=True)
        g_h, _ = backward_linear(self.lin2, g_logits)
        g_pre = g_h * (1.0 - h * h)
        self.bias1.pending_grad = g_pre.sum(axis=0, keepdims=True)
        backward_linear(self.lin1, g_pre)

    def train_step(self, batch: Batch, hyper: AdamHyper) -> tuple[float, MemoryLedger]:
        y1 = forward_linear(self.lin1, batch.inputs) + self.bias1.value
        h = np.tanh(y1)
        logits = forward_linear(self.lin2, h) + self.bias2.value
        loss, g_logits = softmax_xent(logits, batch.targets)
        self.global_step += 1
        _check_finite_loss(self, loss)
        self._backward(h, g_logits)
        optimizer_step_linear(self.lin1, hyper)
        optimizer_step_linear(self.lin2, hyper)
        self.bias1.optimizer_step(hyper)
        self.bias2.optimizer_step(hyper)
        return loss, ledger_report(self)

    def gradients(self, batch: Batch) -> dict[str, np.ndarray]:
        y1 = forward_linear(self.lin1, batch.inputs) + self.bias1.value
        h = np.tanh(y1)
        logits = forward_linear(self.lin2, h) + self.bias2.value
        _, g_logits = softmax_xent(logits, batch.targets)
        self._backward(h, g_logits)
        out = {}
        for layer in (self.lin1, self.lin2):
            g_w = layer.pending_grad
            if layer.compress:
                g_w = matmul(layer.basis.matrix, g_w)
            out[layer.name] = g_w
            layer.pending_grad = None
            layer.pending_transition = None
        for param in (self.bias1, self.bias2):
            out[param.name] = param.pending_grad
            param.pending_grad = None
        return out

    def compressed_layers(self) -> list[CompressedLinear]:
        return [layer for layer in (self.lin1, self.lin2) if layer.compress]

    def ledger_entries(self, compressed: bool) -> list[LedgerEntry]:
        return [
            linear_entry(self.lin1, self.elem_size, compressed),
            vector_entry(self.bias1, self.elem_size),
            stored_activation_entry(
                "tanh1", self.lin1.last_rows, self.hidden, self.elem_size
            ),
            linear_entry(self.lin2, self.elem_size, compressed),
            vector_entry(self.bias2, self.elem_size),
        ]


class SeqBlockModel:
    """Character model: embedding, compressed hidden layer, readout.

    Tokens arrive as a (batch, seq) integer array; rows are flattened to
    N = batch * seq for the linear layers. The embedding table trains with
    full Adam (its one-hot inputs carry no usable low-rank structure).
    """

    def __init__(
        self,
        vocab: int,
        emb_dim: int,
        hidden: int,
        rank: int,
        tracker: TrackerKind,
        rng: np.random.Generator,
        compress: bool = True,
        elem_size: int = 2,
    ):
        table = rng.uniform(-1.0, 1.0, (vocab, emb_dim)) / np.sqrt(emb_dim)
        self.embedding = VectorParam("embedding", table)
        w1 = rng.uniform(-1.0, 1.0, (emb_dim, hidden)) / np.sqrt(emb_dim)
        w2 = rng.uniform(-1.0, 1.0, (hidden, vocab)) / np.sqrt(hidden)
        self.lin1 = CompressedLinear("linear1", w1, min(rank, emb_dim), tracker, compress)
        self.lin2 = CompressedLinear("linear2", w2, min(rank, hidden), tracker, compress)
        self.bias1 = VectorParam("linear1.bias", np.zeros((1, hidden)))
        self.bias2 = VectorParam("linear2.bias", np.zeros((1, vocab)))
        self.vocab = vocab
        self.hidden = hidden
        self.global_step = 0
        self.elem_size = elem_size

    def _embed(self, tokens: np.ndarray) -> np.ndarray:
        return self.embedding.value[np.asarray(tokens).reshape(-1)]

    def initialize(self, batch: Batch) -> None:
        x = self._embed(batch.inputs)
        self.lin1.initialize_basis(x)
        h = np.tanh(matmul(x, self.lin1.weight) + self.bias1.value)
        self.lin2.initialize_basis(h)

    @property
    def initialized(self) -> bool:
        return self.lin1.initialized and self.lin2.initialized

    def predict(self, tokens: np.ndarray) -> np.ndarray:
        x = self._embed(tokens)
        h = np.tanh(matmul(x, self.lin1.weight) + self.bias1.value)
        return matmul(h, self.lin2.weight) + self.bias2.value

    def eval_metric(self, batch: Batch) -> float:
        labels = np.asarray(batch.targets).reshape(-1)
        return accuracy(self.predict(batch.inputs), labels)

    def evaluate_loss(self, batch: Batch) -> float:
        labels = np.asarray(batch.targets).reshape(-1)
        return softmax_xent(self.predict(batch.inputs), labels)[0]

    def train_step(self, batch: Batch, hyper: AdamHyper) -> tuple[float, MemoryLedger]:
        tokens = np.asarray(batch.inputs)
        labels = np.asarray(batch.targets).reshape(-1)
        bsz, seq = tokens.shape
        x = self._embed(tokens)
        y1 = forward_linear(self.lin1, x, batch_shape=(bsz, seq)) + self.bias1.value
        h = np.tanh(y1)
        logits = forward_linear(self.lin2, h, batch_shape=(bsz, seq)) + self.bias2.value
        loss, g_logits = softmax_xent(logits, labels)
        self.global_step += 1
        _check_finite_loss(self, loss)

        self.bias2.pending_grad = g_logits.sum(axis=0, keepdims=True)
        g_h, _ = backward_linear(self.lin2, g_logits)
        g_pre = g_h * (1.0 - h * h)
        self.bias1.pending_grad = g_pre.sum(axis=0, keepdims=True)
        g_x, _ = backward_linear(self.lin1, g_pre)
        g_table = np.zeros_like(self.embedding.value)
        np.add.at(g_table, tokens.reshape(-1), g_x)
        self.embedding.pending_grad = g_table

        optimizer_step_linear(self.lin1, hyper)
        optimizer_step_linear(self.lin2, hyper)
        self.bias1.optimizer_step(hyper)
        self.bias2.optimizer_step(hyper)
        self.embedding.optimizer_step(hyper)
        return loss, ledger_report(self)

    def compressed_layers(self) -> list[CompressedLinear]:
        return [layer for layer in (self.lin1, self.lin2) if layer.compress]

    def ledger_entries(self, compressed: bool) -> list[LedgerEntry]:
        return [
            vector_entry(self.embedding, self.elem_size),
            linear_entry(self.lin1, self.elem_size, compressed),
            vector_entry(self.bias1, self.elem_size),
            stored_activation_entry(
                "tanh1", self.lin1.last_rows, self.hidden, self.elem_size
            ),
            linear_entry(self.lin2, self.elem_size, compressed),
            vector_entry(self.bias2, self.elem_size),
        ]


def train_step(model, batch: Batch, hyper: AdamHyper) -> tuple[float, MemoryLedger]:
    """One full training step: forward, loss, backward, optimizer updates."""
    return model.train_step(batch, hyper)
