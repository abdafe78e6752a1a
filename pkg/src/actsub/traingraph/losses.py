"""Losses and eval metrics for the toy models."""

from __future__ import annotations

import numpy as np


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """0.5 * ||pred - target||_F^2 / N and its gradient w.r.t. pred."""
    if pred.shape != target.shape:
        raise ValueError(f"prediction {pred.shape} vs target {target.shape}")
    rows = pred.shape[0]
    resid = pred - target
    loss = 0.5 * float(np.sum(resid * resid)) / rows
    return loss, resid / rows


def softmax_xent(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over rows and its gradient w.r.t. the logits."""
    labels = np.asarray(labels)
    rows = logits.shape[0]
    if labels.shape != (rows,):
        raise ValueError(f"labels shape {labels.shape}, expected ({rows},)")
    shifted = logits - logits.max(axis=1, keepdims=True)
    expv = np.exp(shifted)
    probs = expv / expv.sum(axis=1, keepdims=True)
    picked = probs[np.arange(rows), labels]
    loss = -float(np.mean(np.log(np.maximum(picked, 1e-300))))
    grad = probs.copy()
    grad[np.arange(rows), labels] -= 1.0
    return loss, grad / rows


def accuracy(logits: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(np.argmax(logits, axis=1) == np.asarray(labels)))
