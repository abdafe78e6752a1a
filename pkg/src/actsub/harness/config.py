"""Experiment configuration and TOML loading.

Config files are flat key-value TOML; sections are permitted and are
flattened into the same namespace. Every key must name an ExperimentConfig
field; unknown keys are errors, not warnings.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

TASKS = ("regression", "drifting-regression", "mlp-classify", "char-seq")
TRACKERS = ("oja", "periodic-pca", "fixed")
SCHEDULES = ("constant", "cosine")
NORM_KINDS = ("frobenius", "spectral-estimate")
INIT_MODES = ("data", "identity")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    task: str = "drifting-regression"
    # dimensions: d input width, m output width, N rows per batch (= b * n)
    d: int = 64
    m: int = 8
    # rows per batch: N, or (b, n) with N = b * n; 0 means "derive"
    N: int = 0
    b: int = 0
    n: int = 0
    rank: int = 4
    # tracker
    tracker: str = "oja"
    gamma: float = 0.1
    interval: int = 10
    norm_floor: float = 1e-30
    norm_kind: str = "frobenius"
    # optimizer
    eta: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    schedule: str = "cosine"
    warmup_frac: float = 0.05
    # run
    steps: int = 500
    seed: int = 0
    out_dir: str = "runs/run"
    elem_size: int = 2
    eval_interval: int = 50
    eval_rows: int = 256
    init_basis_mode: str = "data"
    # task-specific knobs
    r_true: int = 4
    rotation_rate: float = 0.0
    noise: float = 0.01
    hidden: int = 32
    vocab: int = 16

    def validate(self) -> "ExperimentConfig":
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.tracker not in TRACKERS:
            raise ConfigError(f"tracker must be one of {TRACKERS}, got {self.tracker!r}")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if self.norm_kind not in NORM_KINDS:
            raise ConfigError(f"norm_kind must be one of {NORM_KINDS}, got {self.norm_kind!r}")
        if self.init_basis_mode not in INIT_MODES:
            raise ConfigError(
                f"init_basis_mode must be one of {INIT_MODES}, got {self.init_basis_mode!r}"
            )
        # reconcile N with (b, n): either may be given, both must agree
        if self.N <= 0 and self.b <= 0:
            self.N = 64
        if self.b > 0 and self.n <= 0:
            self.n = 1
        if self.b <= 0:
            self.b, self.n = self.N, 1
        if self.N <= 0:
            self.N = self.b * self.n
        if self.N != self.b * self.n:
            raise ConfigError(f"N={self.N} does not equal b*n={self.b * self.n}")
        for field_name in ("d", "m", "rank", "steps", "elem_size", "eval_interval",
                           "eval_rows", "interval", "r_true", "hidden", "vocab"):
            if getattr(self, field_name) < 1:
                raise ConfigError(f"{field_name} must be >= 1, got {getattr(self, field_name)}")
        if self.rank > self.d:
            raise ConfigError(f"rank {self.rank} exceeds input dimension {self.d}")
        if self.r_true > self.d:
            raise ConfigError(f"r_true {self.r_true} exceeds input dimension {self.d}")
        if self.gamma < 0.0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.norm_floor < 0.0:
            raise ConfigError(f"norm_floor must be >= 0, got {self.norm_floor}")
        if self.rotation_rate < 0.0:
            raise ConfigError(f"rotation_rate must be >= 0, got {self.rotation_rate}")
        if self.noise < 0.0:
            raise ConfigError(f"noise must be >= 0, got {self.noise}")
        if not self.eta > 0.0:
            raise ConfigError(f"eta must be > 0, got {self.eta}")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ConfigError("beta1 and beta2 must be in [0, 1)")
        if not self.eps > 0.0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")
        if not 0.0 <= self.warmup_frac < 1.0:
            raise ConfigError(f"warmup_frac must be in [0, 1), got {self.warmup_frac}")
        if self.init_basis_mode == "identity" and self.rank != self.d:
            raise ConfigError("identity basis initialization requires rank == d")
        return self

    def asdict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
_INT_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig) if f.type == "int"}
_FLOAT_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig) if f.type == "float"}


def _flatten(doc: dict) -> dict:
    flat = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            for inner_key, inner_value in value.items():
                if isinstance(inner_value, dict):
                    raise ConfigError(f"nested section {key}.{inner_key} is not allowed")
                if inner_key in flat:
                    raise ConfigError(f"duplicate key {inner_key!r} across sections")
                flat[inner_key] = inner_value
        else:
            if key in flat:
                raise ConfigError(f"duplicate key {key!r} across sections")
            flat[key] = value
    return flat


def config_from_dict(raw: dict) -> ExperimentConfig:
    flat = _flatten(raw)
    unknown = sorted(set(flat) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    coerced = {}
    for key, value in flat.items():
        if key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
            coerced[key] = value
        elif key in _FLOAT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            coerced[key] = float(value)
        else:
            if not isinstance(value, str):
                raise ConfigError(f"{key} must be a string, got {value!r}")
            coerced[key] = value
    return ExperimentConfig(**coerced).validate()


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as handle:
            doc = tomllib.load(handle)
    except FileNotFoundError as err:
        raise ConfigError(f"config file not found: {path}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"config parse error in {path}: {err}") from err
    return config_from_dict(doc)
