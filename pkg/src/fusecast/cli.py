"""Command-line entry point.

Subcommands: scenario, ablation, all, simulate, train-baseline.
Exit codes: 0 success, 1 configuration error, 2 runtime/training failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    ConfigError,
    RunReport,
    SCENARIO_METHODS,
    _write_ablation_mu_csv,
    _write_lines,
    _write_predictions_csv,
    load_scenario_config,
    run_ablation_imputation,
    run_ablation_mu,
    run_all,
    run_scenario,
    scenario_config,
)
from .harness import IMPUTATION_ABLATION_STRATEGIES
from .metrics import CSV_HEADER, csv_row
from .model import save_checkpoint
from .pipeline import SplitSpec, build_feature_rows, write_energy_csv, write_temperature_csv
from .surrogates import (
    BuildingParams,
    default_occupancy,
    forecast_dl,
    load_building_params,
    make_truth,
    make_weather,
    simulate_physics,
    train_baseline_forecaster,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=42, help="master seed")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    p.add_argument("--fast", action="store_true", help="use the short 2160-hour fixture")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fusecast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="run one input-availability scenario")
    p.add_argument("--id", type=int, default=None, help="scenario id 1..5")
    _add_common(p)

    p = sub.add_parser("ablation", help="run one of the ablation studies")
    p.add_argument("--kind", choices=("mu", "imputation"), required=True)
    _add_common(p)

    p = sub.add_parser("all", help="run scenarios 1-5 plus both ablations")
    _add_common(p)

    p = sub.add_parser("simulate", help="run the physics surrogate and emit CSVs")
    _add_common(p)

    p = sub.add_parser("train-baseline", help="train the data-driven baseline and emit its forecast")
    _add_common(p)
    return parser


def _print_methods(report: RunReport, label: str) -> None:
    print(f"{label}: wall {report.wall_seconds:.1f}s")
    for method, rep in report.methods.items():
        print(
            f"  {method:>24}: smape {rep.smape:7.3f}%  mae {rep.mae:8.3f}  "
            f"rmse {rep.rmse:8.3f}  mean_error {rep.mean_error:+8.3f}"
        )


def _cmd_scenario(args) -> int:
    if args.config is not None:
        cfg = load_scenario_config(args.config, seed=args.seed, fast=args.fast)
    elif args.id is not None:
        cfg = scenario_config(args.id, seed=args.seed, fast=args.fast)
    else:
        raise ConfigError("scenario needs --id or --config")
    report = run_scenario(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_predictions_csv(args.out / f"predictions_scenario{cfg.id}.csv", report.predictions)
    rows = [CSV_HEADER] + [csv_row(cfg.id, m, report.methods[m]) for m in SCENARIO_METHODS[cfg.id]]
    _write_lines(args.out / f"scenario{cfg.id}_metrics.csv", rows)
    save_checkpoint(args.out / f"scenario{cfg.id}.ckpt", report.params, report.norm)
    _print_methods(report, f"scenario {cfg.id}")
    return 0


def _cmd_ablation(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    if args.kind == "mu":
        report = run_ablation_mu(scenario_config(1, seed=args.seed, fast=args.fast))
        _write_ablation_mu_csv(args.out / "ablation_mu.csv", report)
        rows = [CSV_HEADER] + [
            csv_row(1, m, report.methods[m]) for m in ("dl", "ep", "pgmn_with_mu", "pgmn_without_mu")
        ]
        _write_lines(args.out / "ablation_mu_metrics.csv", rows)
        _print_methods(report, "memory-unit ablation (scenario 1)")
    else:
        report = run_ablation_imputation(scenario_config(2, seed=args.seed, fast=args.fast))
        rows = [CSV_HEADER] + [
            csv_row(2, f"pgmn_{s}", report.methods[s]) for s in IMPUTATION_ABLATION_STRATEGIES
        ]
        _write_lines(args.out / "ablation_imputation.csv", rows)
        _print_methods(report, "imputation ablation (scenario 2)")
    return 0


def _cmd_all(args) -> int:
    code = run_all(args.out, seed=args.seed, fast=args.fast)
    print(f"wrote reports to {args.out}")
    return code


def _cmd_simulate(args) -> int:
    if args.config is not None:
        try:
            building = load_building_params(args.config)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        building = BuildingParams()
    hours = 2160 if args.fast else 8760
    weather = make_weather(hours, args.seed + 11)
    physics = simulate_physics(building, weather, default_occupancy())
    args.out.mkdir(parents=True, exist_ok=True)
    write_temperature_csv(weather.timestamps, weather.temp_c, args.out / "weather_temp_c.csv")
    write_energy_csv(physics, args.out / "physics_energy.csv")
    print(f"simulated {hours} hours: total {physics.values.sum():.1f} kWh")
    return 0


def _cmd_train_baseline(args) -> int:
    hours = 2160 if args.fast else 8760
    weather = make_weather(hours, args.seed + 11)
    physics = simulate_physics(BuildingParams(), weather, default_occupancy())
    truth = make_truth(physics, bias=50.0, noise_std=8.0, behavior_amp=12.0, seed=args.seed + 22)
    feats = build_feature_rows(truth, weather.temp_c)
    forecaster = train_baseline_forecaster(feats, truth, SplitSpec(), args.seed + 66)
    forecast = forecast_dl(forecaster, feats)
    args.out.mkdir(parents=True, exist_ok=True)
    write_energy_csv(forecast, args.out / "baseline_forecast.csv")
    write_energy_csv(truth, args.out / "truth_energy.csv")
    print(f"baseline forecast written for {forecast.n} hours")
    return 0


_COMMANDS = {
    "scenario": _cmd_scenario,
    "ablation": _cmd_ablation,
    "all": _cmd_all,
    "simulate": _cmd_simulate,
    "train-baseline": _cmd_train_baseline,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, OSError, FloatingPointError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
