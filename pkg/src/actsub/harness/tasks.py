"""Synthetic task streams, all deterministic given a seed.

The regression stream plants a rank-r_true input subspace whose basis
rotates each step by a fixed angle inside a frozen 2*r_true-dimensional
plane; with the planar construction the drift between consecutive true
bases is exactly |sin(rotation_rate)| per step, so tracker difficulty is a
single closed-form knob. Targets come from a fixed planted weight matrix,
which keeps the regression realizable at every step.
"""

from __future__ import annotations

import math

import numpy as np

from ..numerics import matmul, qr_orthonormalize
from ..traingraph import Batch

_EVAL_KEY = 9


def _generator(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_seq))


def _eval_generator(seed: int, step: int, salt: int = 0) -> np.random.Generator:
    return _generator(
        np.random.SeedSequence(entropy=seed, spawn_key=(_EVAL_KEY, salt, step))
    )


class PlantedSubspaceStream:
    """Batches X = Z B_t^T + noise * E with targets Y = X W*.

    B_t is a d x r_true orthonormal basis rotated by ``rotation_rate``
    radians per step inside a fixed 2*r_true-dimensional plane; with
    rotation_rate = 0 the task is a stationary planted-subspace regression.
    """

    def __init__(
        self,
        d: int,
        r_true: int,
        rows: int,
        rotation_rate: float,
        noise: float,
        seed: int,
        out_dim: int = 1,
    ):
        if not 1 <= r_true <= d // 2:
            raise ValueError(
                f"need 1 <= r_true <= d/2 for the rotation plane, got "
                f"r_true={r_true}, d={d}"
            )
        if rows < 1 or out_dim < 1:
            raise ValueError(f"rows and out_dim must be >= 1, got {rows}, {out_dim}")
        if rotation_rate < 0.0 or noise < 0.0:
            raise ValueError("rotation_rate and noise must be >= 0")
        self.d = d
        self.r_true = r_true
        self.rows = rows
        self.rotation_rate = rotation_rate
        self.noise = noise
        self.seed = seed
        plant_seq, stream_seq = np.random.SeedSequence(seed).spawn(2)
        plant = _generator(plant_seq)
        frame = qr_orthonormalize(plant.standard_normal((d, 2 * r_true)))
        self._plane_a = frame[:, :r_true]
        self._plane_b = frame[:, r_true:]
        self.w_star = plant.uniform(-1.0, 1.0, (d, out_dim)) / math.sqrt(d)
        self._stream = _generator(stream_seq)

    def true_basis(self, t: int) -> np.ndarray:
        theta = self.rotation_rate * t
        return self._plane_a * math.cos(theta) + self._plane_b * math.sin(theta)

    def _draw(self, t: int, rows: int, rng: np.random.Generator) -> Batch:
        coords = rng.standard_normal((rows, self.r_true))
        x = matmul(coords, np.ascontiguousarray(self.true_basis(t).T))
        if self.noise > 0.0:
            x = x + self.noise * rng.standard_normal((rows, self.d))
        return Batch(inputs=x, targets=matmul(x, self.w_star))

    def next_batch(self, t: int) -> Batch:
        return self._draw(t, self.rows, self._stream)

    def eval_batch(self, t: int, rows: int) -> Batch:
        return self._draw(t, rows, _eval_generator(self.seed, t))


def gen_drifting_task(
    d: int,
    r_true: int,
    rows: int,
    steps: int,
    rotation_rate: float,
    noise: float,
    seed: int,
    out_dim: int = 1,
):
    """Yield ``steps`` batches from a fresh planted-subspace stream."""
    stream = PlantedSubspaceStream(d, r_true, rows, rotation_rate, noise, seed, out_dim)
    for t in range(steps):
        yield stream.next_batch(t)


class BlobClassifyStream:
    """Gaussian-blob classification: class means planted once, unit noise."""

    def __init__(self, d: int, classes: int, rows: int, seed: int, spread: float = 2.0):
        if classes < 2:
            raise ValueError(f"need at least 2 classes, got {classes}")
        self.d = d
        self.classes = classes
        self.rows = rows
        self.seed = seed
        plant_seq, stream_seq = np.random.SeedSequence(seed).spawn(2)
        plant = _generator(plant_seq)
        self.means = spread * plant.standard_normal((classes, d))
        self._stream = _generator(stream_seq)

    def _draw(self, rows: int, rng: np.random.Generator) -> Batch:
        labels = rng.integers(0, self.classes, size=rows)
        x = self.means[labels] + rng.standard_normal((rows, self.d))
        return Batch(inputs=x, targets=labels)

    def next_batch(self, t: int) -> Batch:
        return self._draw(self.rows, self._stream)

    def eval_batch(self, t: int, rows: int) -> Batch:
        # classification data is stationary: one fixed held-out draw
        return self._draw(rows, _eval_generator(self.seed, 0))


class MarkovCharStream:
    """Character sequences from a planted first-order Markov chain."""

    def __init__(self, vocab: int, batch_size: int, seq_len: int, seed: int):
        if vocab < 2:
            raise ValueError(f"need at least 2 symbols, got {vocab}")
        self.vocab = vocab
        self.batch_size = batch_size
        self.seq_len = seq_len
        self.seed = seed
        plant_seq, stream_seq = np.random.SeedSequence(seed).spawn(2)
        plant = _generator(plant_seq)
        raw = plant.random((vocab, vocab)) ** 3  # sharpen so the chain is learnable
        self._cumulative = np.cumsum(raw / raw.sum(axis=1, keepdims=True), axis=1)
        self._stream = _generator(stream_seq)

    def _draw(self, batch_size: int, rng: np.random.Generator) -> Batch:
        tokens = np.zeros((batch_size, self.seq_len + 1), dtype=np.int64)
        tokens[:, 0] = rng.integers(0, self.vocab, size=batch_size)
        for pos in range(1, self.seq_len + 1):
            u = rng.random(batch_size)
            rows_cdf = self._cumulative[tokens[:, pos - 1]]
            tokens[:, pos] = (u[:, None] > rows_cdf).sum(axis=1)
        return Batch(inputs=tokens[:, :-1], targets=tokens[:, 1:])

    def next_batch(self, t: int) -> Batch:
        return self._draw(self.batch_size, self._stream)

    def eval_batch(self, t: int, rows: int) -> Batch:
        batch_size = max(1, rows // self.seq_len)
        return self._draw(batch_size, _eval_generator(self.seed, 0))
