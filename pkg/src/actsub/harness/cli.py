"""Command-line interface.

Subcommands: train (one experiment), sweep (axis cross product with seed
repeats), drift (drift-series summaries from finished runs), oracle
(independent-oracle verification suites).

Exit codes: 0 success, 1 run failure, 2 config error, 3 oracle failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import ConfigError, load_config
from .driftreport import DriftReportError, drift_report
from .oracles import SUITES, oracle_check
from .runner import run_experiment, run_sweep

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_ORACLE_FAILURE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actsub",
        description="Activation-subspace training experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run one experiment from a config file")
    train.add_argument("--config", required=True, help="TOML config path")
    train.add_argument("--out-dir", default=None, help="override the output directory")
    train.add_argument("--seed", type=int, default=None, help="override the seed")

    sweep = sub.add_parser("sweep", help="run a one-axis sweep with seed repeats")
    sweep.add_argument("--config", required=True, help="TOML config path (base)")
    sweep.add_argument("--axis", required=True, choices=("rank", "gamma", "interval"))
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--seeds", type=int, default=1, help="seed repeats per cell")
    sweep.add_argument("--out-dir", default=None, help="override the sweep root")

    drift = sub.add_parser("drift", help="summarize drift series from run dirs")
    drift.add_argument("--runs", nargs="+", required=True, help="run dirs or metrics.csv")
    drift.add_argument("--window", type=int, default=50, help="trailing window")
    drift.add_argument("--series", action="store_true", help="include full series")

    oracle = sub.add_parser("oracle", help="run independent-oracle verification")
    oracle.add_argument("--suite", default="all", choices=("all", *SUITES))
    return parser


def _parse_values(axis: str, text: str) -> list[float]:
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        out.append(int(chunk) if axis in ("rank", "interval") else float(chunk))
    if not out:
        raise ConfigError(f"--values parsed to an empty list: {text!r}")
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = load_config(args.config)
            if args.out_dir is not None:
                cfg = dataclasses.replace(cfg, out_dir=args.out_dir)
            if args.seed is not None:
                cfg = dataclasses.replace(cfg, seed=args.seed)
            result = run_experiment(cfg)
            print(f"status={result.status} out_dir={result.out_dir}")
            if result.final_eval is not None:
                print(f"final_eval={result.final_eval:.10g}")
            return EXIT_OK if result.status == "ok" else EXIT_RUN_FAILURE

        if args.command == "sweep":
            cfg = load_config(args.config)
            if args.out_dir is not None:
                cfg = dataclasses.replace(cfg, out_dir=args.out_dir)
            values = _parse_values(args.axis, args.values)
            result = run_sweep(cfg, args.axis, values, args.seeds)
            print(f"summary={result.summary_path}")
            for cell in result.cells:
                mean = "nan" if cell.metric_mean is None else f"{cell.metric_mean:.6g}"
                std = "nan" if cell.metric_std is None else f"{cell.metric_std:.6g}"
                print(
                    f"{args.axis}={cell.value:g} mean={mean} std={std} "
                    f"failures={cell.failures}/{cell.seeds}"
                )
            return EXIT_RUN_FAILURE if result.any_failed else EXIT_OK

        if args.command == "drift":
            report = drift_report(args.runs, window=args.window)
            if not args.series:
                for run in report["runs"]:
                    run.pop("mean_drift")
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK

        if args.command == "oracle":
            ok = oracle_check(args.suite)
            return EXIT_OK if ok else EXIT_ORACLE_FAILURE

    except (ConfigError, DriftReportError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
