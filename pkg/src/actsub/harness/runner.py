"""Experiment and sweep runners.

One run directory holds exactly: manifest.json (config, code version,
status, timing), metrics.csv (fixed column order, 17-significant-digit
floats), ledger.json, and a FAILED marker if the run aborted. The metrics
CSV and ledger JSON are byte-identical across reruns with the same config
and seed; wall-clock timing therefore lives only in the manifest.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..backend import backend_name
from ..numerics import make_rng
from ..optim import AdamHyper
from ..subspace import FixedTracker, OjaConfig, OjaTracker, PeriodicPcaTracker
from ..traingraph import (
    LinearRegressionModel,
    Mlp2Model,
    NonFiniteLossError,
    SeqBlockModel,
    ledger_document,
    train_step,
)
from .config import ConfigError, ExperimentConfig
from .tasks import BlobClassifyStream, MarkovCharStream, PlantedSubspaceStream

_WEIGHT_KEY = 100


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _weights_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(_WEIGHT_KEY,)))
    )


def build_tracker(cfg: ExperimentConfig):
    if cfg.tracker == "oja":
        return OjaTracker(
            OjaConfig(gamma=cfg.gamma, norm_floor=cfg.norm_floor, norm_kind=cfg.norm_kind)
        )
    if cfg.tracker == "periodic-pca":
        return PeriodicPcaTracker(interval=cfg.interval)
    if cfg.tracker == "fixed":
        return FixedTracker()
    raise ConfigError(f"unknown tracker {cfg.tracker!r}")


def build_model_and_stream(cfg: ExperimentConfig):
    tracker = build_tracker(cfg)
    rng = _weights_rng(cfg.seed)
    if cfg.task in ("regression", "drifting-regression"):
        rotation = cfg.rotation_rate if cfg.task == "drifting-regression" else 0.0
        stream = PlantedSubspaceStream(
            cfg.d, cfg.r_true, cfg.N, rotation, cfg.noise, cfg.seed, out_dim=cfg.m
        )
        model = LinearRegressionModel(
            cfg.d, cfg.m, cfg.rank, tracker, rng, elem_size=cfg.elem_size
        )
        return model, stream
    if cfg.task == "mlp-classify":
        stream = BlobClassifyStream(cfg.d, cfg.m, cfg.N, cfg.seed)
        model = Mlp2Model(
            cfg.d, cfg.hidden, cfg.m, cfg.rank, tracker, rng, elem_size=cfg.elem_size
        )
        return model, stream
    if cfg.task == "char-seq":
        stream = MarkovCharStream(cfg.vocab, cfg.b, cfg.n, cfg.seed)
        model = SeqBlockModel(
            cfg.vocab, cfg.d, cfg.hidden, cfg.rank, tracker, rng, elem_size=cfg.elem_size
        )
        return model, stream
    raise ConfigError(f"unknown task {cfg.task!r}")


def eta_at(cfg: ExperimentConfig, t: int) -> float:
    """Step-size schedule: linear warmup, then constant or cosine decay."""
    warmup = int(cfg.warmup_frac * cfg.steps)
    if warmup > 0 and t <= warmup:
        return cfg.eta * t / warmup
    if cfg.schedule == "constant":
        return cfg.eta
    # progress stays strictly below 1 so the step size never reaches 0
    span = max(1, cfg.steps - warmup) + 1
    progress = (t - warmup) / span
    return cfg.eta * 0.5 * (1.0 + math.cos(math.pi * progress))


@dataclass
class RunResult:
    out_dir: Path
    status: str
    failed_step: int | None
    final_eval: float | None
    metrics_path: Path
    ledger_path: Path | None
    manifest_path: Path


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run one experiment; returns paths and the final held-out metric."""
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, stream = build_model_and_stream(cfg)

    started = time.monotonic()
    if cfg.init_basis_mode == "identity":
        model.initialize_identity()
    else:
        model.initialize(stream.next_batch(0))

    layer_names = [layer.name for layer in model.compressed_layers()]
    header = ["step", "train_loss", "eval_metric", "mean_drift"]
    header += [f"drift_{name}" for name in layer_names]
    header += ["gamma_eff"]

    lines = [",".join(header)]
    status = "ok"
    failed_step: int | None = None
    final_eval: float | None = None
    steps_done = 0
    for t in range(1, cfg.steps + 1):
        batch = stream.next_batch(t)
        hyper = AdamHyper(eta=eta_at(cfg, t), beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
        try:
            loss, _ = train_step(model, batch, hyper)
        except NonFiniteLossError as err:
            status = "failed"
            failed_step = err.step
            break
        steps_done = t
        layers = model.compressed_layers()
        drifts = [layer.last_drift for layer in layers]
        mean_drift = sum(drifts) / len(drifts) if drifts else 0.0
        gammas = [layer.last_gamma_eff for layer in layers]
        gamma_eff = sum(gammas) / len(gammas) if gammas else 0.0
        cells = [str(t), _fmt(loss)]
        if t % cfg.eval_interval == 0 or t == cfg.steps:
            final_eval = model.eval_metric(stream.eval_batch(t, cfg.eval_rows))
            cells.append(_fmt(final_eval))
        else:
            cells.append("")
        cells.append(_fmt(mean_drift))
        cells += [_fmt(value) for value in drifts]
        cells.append(_fmt(gamma_eff))
        lines.append(",".join(cells))

    metrics_path = out / "metrics.csv"
    _atomic_write_text(metrics_path, "\n".join(lines) + "\n")

    ledger_path: Path | None = None
    if steps_done >= 1:
        ledger_path = out / "ledger.json"
        _atomic_write_text(
            ledger_path, json.dumps(ledger_document(model), indent=2, sort_keys=True) + "\n"
        )

    manifest = {
        "config": cfg.asdict(),
        "code_version": __version__,
        "backend": backend_name(),
        "status": status,
        "failed_step": failed_step,
        "steps_done": steps_done,
        "final_eval": final_eval,
        "elapsed_ms": (time.monotonic() - started) * 1000.0,
    }
    manifest_path = out / "manifest.json"
    _atomic_write_text(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if status == "failed":
        _atomic_write_text(out / "FAILED", f"non-finite loss at step {failed_step}\n")

    return RunResult(
        out_dir=out,
        status=status,
        failed_step=failed_step,
        final_eval=final_eval,
        metrics_path=metrics_path,
        ledger_path=ledger_path,
        manifest_path=manifest_path,
    )


_AXES = {"rank": "rank", "gamma": "gamma", "interval": "interval"}


@dataclass
class SweepCell:
    value: float
    seeds: int
    failures: int
    metric_mean: float | None
    metric_std: float | None


@dataclass
class SweepResult:
    summary_path: Path
    cells: list[SweepCell]
    any_failed: bool


def run_sweep(base: ExperimentConfig, axis: str, values, seeds: int) -> SweepResult:
    """Cross product of one axis with seed repeats; per-cell mean and std.

    Cell failures are recorded in the summary without aborting the sweep.
    """
    if axis not in _AXES:
        raise ConfigError(f"axis must be one of {sorted(_AXES)}, got {axis!r}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs a nonempty value list")
    if seeds < 1:
        raise ConfigError(f"seeds must be >= 1, got {seeds}")
    root = Path(base.out_dir)
    root.mkdir(parents=True, exist_ok=True)

    cells: list[SweepCell] = []
    any_failed = False
    for value in values:
        finals = []
        failures = 0
        for offset in range(seeds):
            seed = base.seed + offset
            sub = root / f"{axis}-{value:g}" / f"seed-{seed}"
            cfg = dataclasses.replace(
                base,
                **{_AXES[axis]: (int(value) if axis in ("rank", "interval") else float(value))},
                seed=seed,
                out_dir=str(sub),
            )
            result = run_experiment(cfg)
            if result.status == "ok" and result.final_eval is not None:
                finals.append(result.final_eval)
            else:
                failures += 1
                any_failed = True
        if finals:
            mean = float(np.mean(finals))
            std = float(np.std(finals))
        else:
            mean = std = None
        cells.append(
            SweepCell(
                value=float(value),
                seeds=seeds,
                failures=failures,
                metric_mean=mean,
                metric_std=std,
            )
        )

    cells.sort(key=lambda cell: cell.value)
    lines = ["axis,value,seeds,failures,final_metric_mean,final_metric_std"]
    for cell in cells:
        lines.append(
            ",".join(
                [
                    axis,
                    _fmt(cell.value),
                    str(cell.seeds),
                    str(cell.failures),
                    _fmt(cell.metric_mean) if cell.metric_mean is not None else "",
                    _fmt(cell.metric_std) if cell.metric_std is not None else "",
                ]
            )
        )
    summary_path = root / "summary.csv"
    _atomic_write_text(summary_path, "\n".join(lines) + "\n")
    return SweepResult(summary_path=summary_path, cells=cells, any_failed=any_failed)
