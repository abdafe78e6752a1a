"""Analytic per-component memory accounting.

Byte counts are modeled, not measured: every stored tensor is counted at a
configurable element size (default 2 bytes, matching half-precision
training reports) even though the computation itself runs in float64. For
a compressed layer the cached activations cost N*r elements instead of
N*d, and gradient plus optimizer state cost r*m and 2*r*m instead of d*m
and 2*d*m; the baseline ledger for the same model uses the uncompressed
counts, so per-layer ratios are exactly r/d.
"""

from __future__ import annotations

from dataclasses import dataclass

from .layers import CompressedLinear, VectorParam

COMPONENTS = ("weights_bytes", "activation_bytes", "gradient_bytes", "optimizer_bytes")


@dataclass(frozen=True)
class LedgerEntry:
    name: str
    weights_bytes: int
    activation_bytes: int
    gradient_bytes: int
    optimizer_bytes: int

    @property
    def total_bytes(self) -> int:
        return (
            self.weights_bytes
            + self.activation_bytes
            + self.gradient_bytes
            + self.optimizer_bytes
        )


@dataclass(frozen=True)
class MemoryLedger:
    entries: tuple[LedgerEntry, ...]
    elem_size: int

    def totals(self) -> dict[str, int]:
        out = {key: 0 for key in COMPONENTS}
        for entry in self.entries:
            for key in COMPONENTS:
                out[key] += getattr(entry, key)
        out["total_bytes"] = sum(out[key] for key in COMPONENTS)
        return out

    def entry(self, name: str) -> LedgerEntry:
        for item in self.entries:
            if item.name == name:
                return item
        raise KeyError(name)


def linear_entry(layer: CompressedLinear, elem: int, compressed: bool) -> LedgerEntry:
    d, m = layer.weight.shape
    rows = layer.last_rows
    rank = layer.rank if (compressed and layer.compress) else d
    return LedgerEntry(
        name=layer.name,
        weights_bytes=d * m * elem,
        activation_bytes=rows * rank * elem,
        gradient_bytes=rank * m * elem,
        optimizer_bytes=2 * rank * m * elem,
    )


def vector_entry(param: VectorParam, elem: int) -> LedgerEntry:
    count = param.value.size
    return LedgerEntry(
        name=param.name,
        weights_bytes=count * elem,
        activation_bytes=0,
        gradient_bytes=count * elem,
        optimizer_bytes=2 * count * elem,
    )


def stored_activation_entry(name: str, rows: int, width: int, elem: int) -> LedgerEntry:
    """Uncompressed tensors kept for backward (nonlinearity inputs)."""
    return LedgerEntry(
        name=name,
        weights_bytes=0,
        activation_bytes=rows * width * elem,
        gradient_bytes=0,
        optimizer_bytes=0,
    )


def ledger_report(model) -> MemoryLedger:
    """Ledger for the model as trained (compressed counts)."""
    if model.global_step < 1:
        raise RuntimeError("ledger requires at least one completed train step")
    return MemoryLedger(tuple(model.ledger_entries(compressed=True)), model.elem_size)


def baseline_report(model) -> MemoryLedger:
    """Ledger for the same model with compression disabled everywhere."""
    if model.global_step < 1:
        raise RuntimeError("ledger requires at least one completed train step")
    return MemoryLedger(tuple(model.ledger_entries(compressed=False)), model.elem_size)


def ledger_document(model) -> dict:
    """JSON-ready document: per-layer entries, totals, and baseline totals."""
    ledger = ledger_report(model)
    baseline = baseline_report(model)
    return {
        "layers": [
            {
                "name": entry.name,
                "weights_bytes": entry.weights_bytes,
                "activation_bytes": entry.activation_bytes,
                "gradient_bytes": entry.gradient_bytes,
                "optimizer_bytes": entry.optimizer_bytes,
            }
            for entry in ledger.entries
        ],
        "totals": ledger.totals(),
        "elem_size": ledger.elem_size,
        "baseline_totals": baseline.totals(),
    }
