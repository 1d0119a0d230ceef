"""End-to-end experiment harness.

Builds seeded synthetic fixtures (weather -> RC physics trace -> biased
ground truth -> trained data-driven baseline), runs the five
input-availability scenarios and the two ablations, and writes metric
tables, prediction CSVs, training histories, and model checkpoints.

One master seed fans out deterministically to every random consumer
(weather, truth noise, sparsity mask, parameter init, training shuffle,
baseline init), so a rerun with the same seed reproduces every CSV byte
for byte.
"""

from __future__ import annotations

import json
import subprocess
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .metrics import CSV_HEADER, MetricReport, compute_report, csv_row, cv_rmse, nmbe
from .model import (
    FusionDims,
    FusionParams,
    TrainConfig,
    init_params,
    predict,
    save_checkpoint,
    train,
)
from .pipeline import (
    EnergySeries,
    NormStats,
    SplitSpec,
    apply_sparsity,
    assemble_samples,
    build_feature_rows,
    denormalize_target,
    fit_norm_stats,
    impute,
    normalize_samples,
)
from .surrogates import (
    BuildingParams,
    default_occupancy,
    forecast_dl,
    make_truth,
    make_weather,
    simulate_physics,
    train_baseline_forecaster,
)


class ConfigError(ValueError):
    """Invalid scenario configuration (CLI exit code 1)."""


FULL_HOURS = 8760
FAST_HOURS = 2160

DEFAULT_BIAS_KWH = 50.0
DEFAULT_NOISE_STD_KWH = 8.0
DEFAULT_BEHAVIOR_AMP_KWH = 12.0

DEFAULT_DIMS = FusionDims(embed_dim=32, memory_dim=16, hidden_dim=32)

# Master-seed fan-out offsets; every stochastic consumer gets its own stream.
SEED_WEATHER = 11
SEED_TRUTH = 22
SEED_SPARSITY = 33
SEED_INIT = 44
SEED_TRAIN = 55
SEED_BASELINE = 66

SCENARIO_METHODS = {
    1: ("dl", "ep", "pgmn"),
    2: ("dl", "ep", "pgmn"),
    3: ("ep", "pgmn"),
    4: ("ep", "pgmn"),
    5: ("dl", "pgmn"),
}

IMPUTATION_ABLATION_STRATEGIES = ("nearest_neighbor", "historical_averaging", "linear_interpolation")

REPORT_FILES = (
    "scenario_table.csv",
    "ablation_mu.csv",
    "ablation_mu_metrics.csv",
    "ablation_imputation.csv",
    "calibration.csv",
    "train_history.csv",
    "run_summary.json",
)

_PRESETS = {
    1: dict(dl_available=True, ep_available=True, truth_mode="full"),
    2: dict(dl_available=True, ep_available=True, truth_mode="sparse"),
    3: dict(dl_available=False, ep_available=True, truth_mode="absent"),
    4: dict(dl_available=False, ep_available=True, truth_mode="full"),
    5: dict(dl_available=True, ep_available=False, truth_mode="full"),
}


def _default_train(seed: int) -> TrainConfig:
    return TrainConfig(
        eta=3e-3,
        optimizer="adam",
        max_epochs=300,
        batch_size=128,
        early_stop_patience=20,
        seed=seed + SEED_TRAIN,
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """One scenario run: which inputs exist, how truth is degraded, which
    imputation fills it, plus split/training settings and the master seed."""

    id: int
    dl_available: bool
    ep_available: bool
    truth_mode: str  # "full" | "sparse" | "absent"
    sparse_frac: float = 0.2
    imputation: str = "linear_interpolation"
    split: SplitSpec = field(default_factory=SplitSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    memory_unit_enabled: bool = True
    seed: int = 42
    year_hours: int = FULL_HOURS

    def __post_init__(self):
        if self.id not in _PRESETS:
            raise ConfigError(f"scenario id must be 1..5, got {self.id}")
        preset = _PRESETS[self.id]
        for key, expected in preset.items():
            if getattr(self, key) != expected:
                raise ConfigError(f"scenario {self.id} requires {key}={expected!r}, got {getattr(self, key)!r}")
        if self.truth_mode not in ("full", "sparse", "absent"):
            raise ConfigError(f"unknown truth_mode {self.truth_mode!r}")
        if not 0.0 <= self.sparse_frac < 1.0:
            raise ConfigError("sparse_frac must lie in [0, 1)")
        if self.year_hours < 24 * 10:
            raise ConfigError("year_hours is too small to build windows and splits")


def scenario_config(scenario_id: int, seed: int = 42, fast: bool = False, **overrides) -> ScenarioConfig:
    """The canonical config for one of the five scenarios."""
    if scenario_id not in _PRESETS:
        raise ConfigError(f"scenario id must be 1..5, got {scenario_id}")
    kwargs = dict(_PRESETS[scenario_id])
    kwargs.update(
        id=scenario_id,
        seed=seed,
        year_hours=FAST_HOURS if fast else FULL_HOURS,
        train=_default_train(seed),
    )
    kwargs.update(overrides)
    return ScenarioConfig(**kwargs)


@dataclass
class Fixture:
    """Aligned series for one scenario run (all start at fixture hour 24 so
    every step has a full lag window behind it)."""

    timestamps: np.ndarray
    truth: EnergySeries          # original actuals, used for evaluation only
    label_truth: EnergySeries    # what training may see (sparse in scenario 2)
    physics: EnergySeries
    dl: EnergySeries | None


@dataclass
class RunReport:
    """Everything one scenario or ablation run produced."""

    scenario: int
    methods: dict[str, MetricReport]
    config: dict
    wall_seconds: float
    version: str
    predictions: dict[str, np.ndarray | None]
    history: list[tuple[float, float]]
    params: FusionParams | None = None
    norm: NormStats | None = None
    fixture: Fixture | None = None
    extra: dict = field(default_factory=dict)


def version_stamp() -> str:
    try:
        sha = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            check=False,
            text=True,
        ).stdout.strip()
    except OSError:
        sha = ""
    return f"fusecast {__version__}" + (f"+g{sha}" if sha else "")


def build_fixture(cfg: ScenarioConfig) -> Fixture:
    weather = make_weather(cfg.year_hours, cfg.seed + SEED_WEATHER)
    schedule = default_occupancy()
    building = BuildingParams()
    physics = simulate_physics(building, weather, schedule)
    truth = make_truth(
        physics,
        bias=DEFAULT_BIAS_KWH,
        noise_std=DEFAULT_NOISE_STD_KWH,
        behavior_amp=DEFAULT_BEHAVIOR_AMP_KWH,
        seed=cfg.seed + SEED_TRUTH,
    )

    if cfg.truth_mode == "sparse":
        label_truth = apply_sparsity(truth, cfg.sparse_frac, cfg.seed + SEED_SPARSITY)
        lag_source = impute(label_truth, cfg.imputation)
    else:
        label_truth = truth
        lag_source = truth

    dl_series = None
    if cfg.dl_available:
        feats = build_feature_rows(lag_source, weather.temp_c)
        forecaster = train_baseline_forecaster(feats, lag_source, cfg.split, cfg.seed + SEED_BASELINE)
        dl_series = forecast_dl(forecaster, feats)

    a = 24
    return Fixture(
        timestamps=truth.timestamps[a:],
        truth=truth.slice(a),
        label_truth=label_truth.slice(a),
        physics=physics.slice(a),
        dl=dl_series,
    )


def _train_on_fixture(
    cfg: ScenarioConfig, fixture: Fixture, memory_enabled: bool
) -> tuple[FusionParams, NormStats, list[tuple[float, float]], np.ndarray, int]:
    """Assemble, normalize, train, and predict the test split (denormalized).

    Returns (params, norm stats, history, test predictions in kWh, test start index).
    """
    samples = assemble_samples(fixture.dl, fixture.physics, fixture.label_truth, cfg)
    n = len(samples)
    i_train, i_val = cfg.split.boundaries(n)
    train_s, val_s, test_s = samples[:i_train], samples[i_train:i_val], samples[i_val:]
    stats = fit_norm_stats(train_s)
    norm_train = normalize_samples(train_s, stats)
    norm_val = normalize_samples(val_s, stats)
    norm_test = normalize_samples(test_s, stats)

    dims = replace(DEFAULT_DIMS, memory_enabled=memory_enabled)
    params0 = init_params(dims, cfg.seed + SEED_INIT)
    params, history = train(norm_train, params0, cfg.train, norm_val)
    yhat = denormalize_target(predict(norm_test, params), stats)
    return params, stats, history, yhat, i_val


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    """Run one scenario end to end and evaluate every applicable method on
    the chronological test split against the original actuals."""
    t0 = time.perf_counter()
    fixture = build_fixture(cfg)
    params, stats, history, pgmn_pred, i_test = _train_on_fixture(cfg, fixture, cfg.memory_unit_enabled)

    actual = fixture.truth.values[i_test:]
    preds: dict[str, np.ndarray | None] = {
        "timestamps": fixture.timestamps[i_test:],
        "actual": actual,
        "dl": fixture.dl.values[i_test:] if cfg.dl_available else None,
        "ep": fixture.physics.values[i_test:] if cfg.ep_available else None,
        "pgmn": pgmn_pred,
    }
    methods: dict[str, MetricReport] = {}
    for name in SCENARIO_METHODS[cfg.id]:
        methods[name] = compute_report(actual, preds[name])

    return RunReport(
        scenario=cfg.id,
        methods=methods,
        config=asdict(cfg),
        wall_seconds=time.perf_counter() - t0,
        version=version_stamp(),
        predictions=preds,
        history=history,
        params=params,
        norm=stats,
        fixture=fixture,
    )


def run_ablation_mu(cfg: ScenarioConfig) -> RunReport:
    """Train the full model and the memory-ablated variant on the identical
    scenario-1 fixture and report them side by side, including the
    samplewise signed-error table."""
    if cfg.id != 1:
        raise ConfigError("the memory-unit ablation runs under scenario 1")
    t0 = time.perf_counter()
    fixture = build_fixture(cfg)
    params_with, stats, hist_with, pred_with, i_test = _train_on_fixture(cfg, fixture, True)
    params_without, _, hist_without, pred_without, _ = _train_on_fixture(cfg, fixture, False)

    actual = fixture.truth.values[i_test:]
    dl = fixture.dl.values[i_test:]
    ep = fixture.physics.values[i_test:]

    methods = {
        "dl": compute_report(actual, dl),
        "ep": compute_report(actual, ep),
        "pgmn_with_mu": compute_report(actual, pred_with),
        "pgmn_without_mu": compute_report(actual, pred_without),
    }
    table = [
        (dl[i], ep[i], actual[i], pred_with[i], pred_with[i] - actual[i], pred_without[i], pred_without[i] - actual[i])
        for i in range(len(actual))
    ]
    return RunReport(
        scenario=cfg.id,
        methods=methods,
        config=asdict(cfg),
        wall_seconds=time.perf_counter() - t0,
        version=version_stamp(),
        predictions={
            "timestamps": fixture.timestamps[i_test:],
            "actual": actual,
            "dl": dl,
            "ep": ep,
            "pgmn": pred_with,
        },
        history=hist_with,
        params=params_with,
        norm=stats,
        fixture=fixture,
        extra={
            "table": table,
            "params_without": params_without,
            "history_without": hist_without,
            "mean_abs_signed_with": float(np.mean(np.abs(pred_with - actual))),
            "mean_abs_signed_without": float(np.mean(np.abs(pred_without - actual))),
        },
    )


def run_ablation_imputation(cfg: ScenarioConfig) -> RunReport:
    """Run scenario 2 once per imputation strategy with identical seeds, so
    the sparsity mask (and everything else seeded) is shared and only the
    filled values differ."""
    if cfg.id != 2:
        raise ConfigError("the imputation ablation runs under scenario 2")
    t0 = time.perf_counter()
    methods: dict[str, MetricReport] = {}
    checkpoints: dict[str, FusionParams] = {}
    norms: dict[str, NormStats] = {}
    last = None
    for strategy in IMPUTATION_ABLATION_STRATEGIES:
        sub = replace(cfg, imputation=strategy)
        rep = run_scenario(sub)
        methods[strategy] = rep.methods["pgmn"]
        checkpoints[strategy] = rep.params
        norms[strategy] = rep.norm
        last = rep
    return RunReport(
        scenario=cfg.id,
        methods=methods,
        config=asdict(cfg),
        wall_seconds=time.perf_counter() - t0,
        version=version_stamp(),
        predictions=last.predictions,
        history=last.history,
        fixture=last.fixture,
        extra={"checkpoints": checkpoints, "norms": norms},
    )


# ---------------------------------------------------------------------------
# File emission
# ---------------------------------------------------------------------------

def _write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_predictions_csv(path: Path, preds: dict) -> None:
    lines = ["timestamp,actual,dl,ep,pgmn"]
    n = len(preds["actual"])
    for i in range(n):
        ts = np.datetime_as_string(preds["timestamps"][i].astype("datetime64[m]"))
        cells = [ts, repr(float(preds["actual"][i]))]
        for key in ("dl", "ep", "pgmn"):
            arr = preds[key]
            cells.append("" if arr is None else repr(float(arr[i])))
        lines.append(",".join(cells))
    _write_lines(path, lines)


def _write_ablation_mu_csv(path: Path, report: RunReport) -> None:
    lines = ["DL,EP,Actual Energy,PgMN (With MU),PgMN (Without MU)"]
    for dl, ep, actual, pw, ew, po, eo in report.extra["table"]:
        lines.append(
            f"{dl:.2f},{ep:.2f},{actual:.2f},"
            f"{pw:.2f} ({ew:+.2f}),{po:.2f} ({eo:+.2f})"
        )
    lines.append(
        "Mean Error,,,"
        f"{report.extra['mean_abs_signed_with']:.2f},{report.extra['mean_abs_signed_without']:.2f}"
    )
    _write_lines(path, lines)


def _monthly_sums(series: EnergySeries) -> np.ndarray:
    months = series.timestamps.astype("datetime64[M]")
    out = []
    for m in np.unique(months):
        out.append(float(series.values[months == m].sum()))
    return np.asarray(out)


def _write_calibration_csv(path: Path, fixture: Fixture) -> None:
    """NMBE / CV-RMSE of the physics surrogate against the synthetic actuals
    at hourly and monthly granularity."""
    lines = ["interval,measured_kwh,simulated_kwh,nmbe_pct,cv_rmse_pct"]
    y, sim = fixture.truth.values, fixture.physics.values
    lines.append(
        f"hourly,{np.sum(y):.1f},{np.sum(sim):.1f},{nmbe(y, sim):.6g},{cv_rmse(y, sim):.6g}"
    )
    ym, sm = _monthly_sums(fixture.truth), _monthly_sums(fixture.physics)
    lines.append(
        f"monthly,{np.sum(ym):.1f},{np.sum(sm):.1f},{nmbe(ym, sm):.6g},{cv_rmse(ym, sm):.6g}"
    )
    _write_lines(path, lines)


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


class StageFailed(RuntimeError):
    """A named harness stage failed; the message carries the stage."""


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageFailed:
        raise
    except Exception as exc:
        raise StageFailed(f"stage {name!r} failed: {exc}") from exc


def run_all(out_dir, seed: int = 42, fast: bool = False) -> int:
    """Run scenarios 1-5 plus both ablations and write the whole report
    inventory into ``out_dir``.  Returns the process exit code (0 = success);
    any failure raises StageFailed naming the stage."""
    t0 = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt_dir = out / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)

    scenario_rows = [CSV_HEADER]
    history_rows = ["scenario,epoch,train_mse,val_mse"]
    summary: dict = {"version": version_stamp(), "seed": seed, "fast": fast, "scenarios": {}}

    scenario1_report = None
    for sid in (1, 2, 3, 4, 5):
        cfg = scenario_config(sid, seed=seed, fast=fast)
        report = _stage(f"scenario{sid}", run_scenario, cfg)
        if sid == 1:
            scenario1_report = report
        for method in SCENARIO_METHODS[sid]:
            scenario_rows.append(csv_row(sid, method, report.methods[method]))
        for epoch, (tr, va) in enumerate(report.history):
            history_rows.append(f"{sid},{epoch},{tr!r},{va!r}")
        _write_predictions_csv(out / f"predictions_scenario{sid}.csv", report.predictions)
        save_checkpoint(ckpt_dir / f"scenario{sid}.ckpt", report.params, report.norm)
        summary["scenarios"][str(sid)] = {
            "wall_seconds": report.wall_seconds,
            "config": _json_ready(report.config),
            "methods": {m: asdict(r) for m, r in report.methods.items()},
        }

    _write_lines(out / "scenario_table.csv", scenario_rows)
    _write_lines(out / "train_history.csv", history_rows)
    _write_calibration_csv(out / "calibration.csv", scenario1_report.fixture)

    mu = _stage("ablation_mu", run_ablation_mu, scenario_config(1, seed=seed, fast=fast))
    _write_ablation_mu_csv(out / "ablation_mu.csv", mu)
    mu_rows = [CSV_HEADER]
    for method in ("dl", "ep", "pgmn_with_mu", "pgmn_without_mu"):
        mu_rows.append(csv_row(1, method, mu.methods[method]))
    _write_lines(out / "ablation_mu_metrics.csv", mu_rows)
    save_checkpoint(ckpt_dir / "ablation_mu_with.ckpt", mu.params, mu.norm)
    save_checkpoint(ckpt_dir / "ablation_mu_without.ckpt", mu.extra["params_without"], mu.norm)
    summary["ablation_mu"] = {
        "wall_seconds": mu.wall_seconds,
        "methods": {m: asdict(r) for m, r in mu.methods.items()},
    }

    imp = _stage("ablation_imputation", run_ablation_imputation, scenario_config(2, seed=seed, fast=fast))
    imp_rows = [CSV_HEADER]
    for strategy in IMPUTATION_ABLATION_STRATEGIES:
        imp_rows.append(csv_row(2, f"pgmn_{strategy}", imp.methods[strategy]))
    _write_lines(out / "ablation_imputation.csv", imp_rows)
    for strategy in IMPUTATION_ABLATION_STRATEGIES:
        save_checkpoint(
            ckpt_dir / f"ablation_imputation_{strategy}.ckpt",
            imp.extra["checkpoints"][strategy],
            imp.extra["norms"][strategy],
        )
    summary["ablation_imputation"] = {
        "wall_seconds": imp.wall_seconds,
        "methods": {m: asdict(r) for m, r in imp.methods.items()},
    }

    summary["wall_seconds_total"] = time.perf_counter() - t0
    summary["files"] = sorted(p.name for p in out.iterdir() if p.is_file())
    (out / "run_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# Flat key=value scenario config files
# ---------------------------------------------------------------------------

_CONFIG_BOOL_KEYS = {"dl_available", "ep_available", "memory_unit_enabled"}
_CONFIG_INT_KEYS = {"id", "seed", "year_hours", "max_epochs", "batch_size", "early_stop_patience"}
_CONFIG_FLOAT_KEYS = {"sparse_frac", "train_frac", "val_frac", "test_frac", "eta"}
_CONFIG_STR_KEYS = {"truth_mode", "imputation", "optimizer"}
_CONFIG_KEYS = _CONFIG_BOOL_KEYS | _CONFIG_INT_KEYS | _CONFIG_FLOAT_KEYS | _CONFIG_STR_KEYS


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def load_scenario_config(path, seed: int | None = None, fast: bool = False) -> ScenarioConfig:
    """Parse a flat key=value file mirroring ScenarioConfig; unknown keys are
    rejected.  ``seed`` (when given) and ``fast`` override the file."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, val = stripped.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = val.strip()

    if "id" not in raw:
        raise ConfigError(f"{path}: scenario config must set id")
    try:
        parsed: dict = {}
        for key, val in raw.items():
            if key in _CONFIG_BOOL_KEYS:
                parsed[key] = _parse_bool(val)
            elif key in _CONFIG_INT_KEYS:
                parsed[key] = int(val)
            elif key in _CONFIG_FLOAT_KEYS:
                parsed[key] = float(val)
            else:
                parsed[key] = val
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    sid = parsed.pop("id")
    cfg_seed = seed if seed is not None else parsed.pop("seed", 42)
    parsed.pop("seed", None)

    split_kwargs = {k: parsed.pop(k) for k in ("train_frac", "val_frac", "test_frac") if k in parsed}
    train_kwargs = {
        k: parsed.pop(k)
        for k in ("eta", "optimizer", "max_epochs", "batch_size", "early_stop_patience")
        if k in parsed
    }
    if train_kwargs.get("batch_size") == 0:
        train_kwargs["batch_size"] = None  # 0 selects the literal full-epoch mode
    overrides: dict = dict(parsed)
    if split_kwargs:
        try:
            overrides["split"] = SplitSpec(**{**asdict(SplitSpec()), **split_kwargs})
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if train_kwargs:
        base = _default_train(cfg_seed)
        try:
            overrides["train"] = replace(base, **train_kwargs)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if fast and "year_hours" not in overrides:
        overrides["year_hours"] = FAST_HOURS
    try:
        return scenario_config(sid, seed=cfg_seed, fast=fast, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
