"""Drift-series summaries from metrics files.

Segments each run's mean-drift series into a transient and a steady phase:
the steady phase begins where the trailing-window mean stops changing by
5% or more over one window length. Reports the transient length and the
steady-state mean drift per run.
"""

from __future__ import annotations

import csv
from pathlib import Path


class DriftReportError(ValueError):
    pass


def _read_drift_series(path: Path) -> list[float]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "mean_drift" not in reader.fieldnames:
            raise DriftReportError(f"{path}: no mean_drift column")
        return [float(row["mean_drift"]) for row in reader]


def segment_drift(series: list[float], window: int = 50) -> tuple[int, float]:
    """Return (transient length in steps, steady-state mean drift).

    The trailing-window mean at step s covers drift[s-window+1 .. s]; the
    series is steady from s0 onward when the window ending at s0 + window
    differs from the window ending at s0 by less than 5% relative. An
    all-constant series therefore has transient length 0.
    """
    if not series:
        raise DriftReportError("empty drift series")
    window = max(1, min(window, len(series) // 2))

    def trailing_mean(end: int) -> float:
        start = max(0, end - window + 1)
        chunk = series[start : end + 1]
        return sum(chunk) / len(chunk)

    transient = len(series)
    for s in range(window, len(series)):
        prev = trailing_mean(s - window)
        curr = trailing_mean(s)
        if abs(curr - prev) < 0.05 * max(abs(prev), 1e-12):
            transient = s - window
            break
    steady = series[transient:]
    steady_mean = sum(steady) / len(steady) if steady else 0.0
    return transient, steady_mean


def drift_report(metrics_paths, window: int = 50) -> dict:
    """Summaries for one or more metrics.csv files (or run directories)."""
    runs = []
    for raw in metrics_paths:
        path = Path(raw)
        if path.is_dir():
            path = path / "metrics.csv"
        if not path.exists():
            raise DriftReportError(f"metrics file not found: {path}")
        series = _read_drift_series(path)
        transient, steady_mean = segment_drift(series, window=window)
        runs.append(
            {
                "path": str(path),
                "steps": len(series),
                "transient_steps": transient,
                "steady_mean_drift": steady_mean,
                "mean_drift": series,
            }
        )
    return {"window": window, "runs": runs}
