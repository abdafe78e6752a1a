"""Experiment harness: config, synthetic tasks, runners, reports, CLI."""

from .config import ConfigError, ExperimentConfig, load_config
from .driftreport import drift_report
from .oracles import oracle_check
from .runner import RunResult, run_experiment, run_sweep
from .tasks import Batch, PlantedSubspaceStream, gen_drifting_task

__all__ = [
    "Batch",
    "ConfigError",
    "ExperimentConfig",
    "PlantedSubspaceStream",
    "RunResult",
    "drift_report",
    "gen_drifting_task",
    "load_config",
    "oracle_check",
    "run_experiment",
    "run_sweep",
]
