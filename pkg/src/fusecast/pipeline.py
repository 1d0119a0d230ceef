"""Sample construction for the fusion model: hourly series with missingness,
sliding windows, imputation, sparsity injection, mask/target assembly,
normalization statistics, and chronological splits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

IMPUTATION_KINDS = (
    "nearest_neighbor",
    "linear_interpolation",
    "historical_averaging",
    "neighbor_mean_or_zero",
)

STD_FLOOR = 1e-8

_HOUR = np.timedelta64(1, "h")


class AlignmentError(ValueError):
    """Series that must share a timestamp grid do not."""


def hourly_range(start: str | np.datetime64, n: int) -> np.ndarray:
    """n contiguous hourly timestamps beginning at ``start``."""
    t0 = np.datetime64(start, "h")
    return t0 + np.arange(n) * _HOUR


def hour_of_day(timestamps: np.ndarray) -> np.ndarray:
    h = timestamps.astype("datetime64[h]").astype(np.int64)
    return (h % 24).astype(np.int64)


def day_of_week(timestamps: np.ndarray) -> np.ndarray:
    # Unix epoch 1970-01-01 was a Thursday; Monday = 0.
    h = timestamps.astype("datetime64[h]").astype(np.int64)
    return ((h // 24 + 3) % 7).astype(np.int64)


def hour_of_week(timestamps: np.ndarray) -> np.ndarray:
    return day_of_week(timestamps) * 24 + hour_of_day(timestamps)


@dataclass
class EnergySeries:
    """Hourly kWh series with per-step availability.

    Steps with ``present == False`` hold NaN as an unmistakable sentinel;
    the constructor enforces it so stale values can never leak through.
    """

    timestamps: np.ndarray
    values: np.ndarray
    present: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps).astype("datetime64[h]")
        self.values = np.array(self.values, dtype=np.float64)
        self.present = np.array(self.present, dtype=bool)
        if not (len(self.timestamps) == len(self.values) == len(self.present)):
            raise ValueError("timestamps, values and present flags must have equal length")
        if len(self.timestamps) > 1:
            deltas = np.diff(self.timestamps)
            if not np.all(deltas == _HOUR):
                raise ValueError("timestamps must be contiguous at 1-hour spacing")
        self.values[~self.present] = np.nan
        if not np.all(np.isfinite(self.values[self.present])):
            raise ValueError("present values must be finite")

    @classmethod
    def full(cls, timestamps, values) -> "EnergySeries":
        values = np.asarray(values, dtype=np.float64)
        return cls(timestamps, values, np.ones(len(values), dtype=bool))

    @property
    def n(self) -> int:
        return len(self.values)

    def copy(self) -> "EnergySeries":
        return EnergySeries(self.timestamps.copy(), self.values.copy(), self.present.copy())

    def slice(self, start: int, stop: int | None = None) -> "EnergySeries":
        sl = slice(start, stop)
        return EnergySeries(self.timestamps[sl], self.values[sl], self.present[sl])


@dataclass(frozen=True)
class FeatureRow:
    """Inputs for one next-hour forecast: calendar fields, outdoor
    temperature, and the 24 preceding hourly kWh values."""

    timestamp: np.datetime64
    temp_c: float
    day_of_month: int
    day_of_year: int
    day_of_week: int
    hour: int
    lags: np.ndarray

    def __post_init__(self):
        if len(self.lags) != 24:
            raise ValueError("lag window length must be exactly 24")


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/validation/test fractions."""

    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise ValueError("split fractions must be positive")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)}")

    def boundaries(self, n: int) -> tuple[int, int]:
        """Indices (train_end, val_end); test runs to n."""
        i_train = int(n * self.train_frac)
        i_val = int(n * (self.train_frac + self.val_frac))
        return i_train, i_val


@dataclass(frozen=True)
class MaskedSample:
    """One training instance for the fusion model.

    ``dl``/``ep`` are the two forecast values with their availability masks.
    A masked-out value is always a usable stand-in (imputed or zero), never
    NaN.  ``target`` may be None when the scenario declares actuals absent;
    ``target_is_proxy`` marks targets that were substituted from the physics
    stream, and ``target_observed`` is False for any target that is not a
    real measurement (proxy or imputed), which keeps them out of
    normalization statistics.
    """

    dl: float
    dl_mask: int
    ep: float
    ep_mask: int
    target: float | None
    target_is_proxy: bool = False
    target_observed: bool = True

    def __post_init__(self):
        if self.dl_mask not in (0, 1) or self.ep_mask not in (0, 1):
            raise ValueError("masks must be 0 or 1")
        if not (np.isfinite(self.dl) and np.isfinite(self.ep)):
            raise ValueError("forecast inputs must be finite")
        if self.target is not None and not np.isfinite(self.target):
            raise ValueError("target must be finite when present")


@dataclass(frozen=True)
class Window:
    """One stride-1 sliding window: ``inputs`` covers the lookback hours,
    ``targets`` the horizon hours immediately after."""

    start: int
    inputs: np.ndarray
    targets: np.ndarray
    feature_rows: tuple | None = None


def make_windows(
    series: EnergySeries,
    features: list[FeatureRow] | None = None,
    lookback: int = 24,
    horizon: int = 24,
    split: SplitSpec | None = None,
) -> list[Window]:
    """All overlapping (lookback, horizon) window pairs at stride 1.

    ``features``, when given, must align 1:1 with the series steps (pad with
    None where no row exists); each window then carries the rows covering
    its lookback span.  When ``split`` is given, windows that would straddle
    a split boundary are dropped instead of padded.
    """
    n = series.n
    if n < lookback + horizon:
        raise ValueError(f"series of length {n} is too short for lookback {lookback} + horizon {horizon}")
    if features is not None and len(features) != n:
        raise AlignmentError(f"{len(features)} feature rows for {n} series steps")
    boundaries: tuple[int, ...] = ()
    if split is not None:
        boundaries = split.boundaries(n)
    out = []
    for start in range(n - lookback - horizon + 1):
        end = start + lookback + horizon
        if any(start < b < end for b in boundaries):
            continue
        rows = tuple(features[start : start + lookback]) if features is not None else None
        out.append(
            Window(
                start=start,
                inputs=series.values[start : start + lookback].copy(),
                targets=series.values[start + lookback : end].copy(),
                feature_rows=rows,
            )
        )
    return out


def _nearest_fill(values: np.ndarray, present: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Value of the temporally closest present step for each target index;
    ties go to the earlier step."""
    present_idx = np.flatnonzero(present)
    pos = np.searchsorted(present_idx, targets)
    out = np.empty(len(targets), dtype=np.float64)
    for k, (i, p) in enumerate(zip(targets, pos)):
        left = present_idx[p - 1] if p > 0 else None
        right = present_idx[p] if p < len(present_idx) else None
        if left is None:
            pick = right
        elif right is None:
            pick = left
        else:
            pick = left if (i - left) <= (right - i) else right
        out[k] = values[pick]
    return out


def impute(series: EnergySeries, strategy: str) -> EnergySeries:
    """Fill every missing step according to ``strategy``.

    Present values pass through bit-exactly.  ``historical_averaging`` is
    causal: it only looks at the same hour-of-day on earlier days.
    """
    if strategy not in IMPUTATION_KINDS:
        raise ValueError(f"unknown imputation strategy {strategy!r}")
    missing = np.flatnonzero(~series.present)
    if missing.size == 0:
        return series.copy()
    values = series.values.copy()
    present = series.present

    if strategy == "neighbor_mean_or_zero":
        for i in missing:
            neigh = []
            if i > 0 and present[i - 1]:
                neigh.append(values[i - 1])
            if i + 1 < series.n and present[i + 1]:
                neigh.append(values[i + 1])
            values[i] = float(np.mean(neigh)) if neigh else 0.0
        return EnergySeries.full(series.timestamps, values)

    if not np.any(present):
        raise ValueError(f"cannot impute an all-missing series with {strategy}")

    if strategy == "nearest_neighbor":
        values[missing] = _nearest_fill(series.values, present, missing)
    elif strategy == "linear_interpolation":
        present_idx = np.flatnonzero(present)
        values[missing] = np.interp(missing.astype(np.float64), present_idx.astype(np.float64), series.values[present_idx])
    elif strategy == "historical_averaging":
        hods = hour_of_day(series.timestamps)
        sums = np.zeros(24)
        counts = np.zeros(24, dtype=np.int64)
        fallback = _nearest_fill(series.values, present, missing)
        fb = dict(zip(missing.tolist(), fallback.tolist()))
        for i in range(series.n):
            h = hods[i]
            if not present[i]:
                values[i] = sums[h] / counts[h] if counts[h] > 0 else fb[i]
            else:
                sums[h] += series.values[i]
                counts[h] += 1
    return EnergySeries.full(series.timestamps, values)


def apply_sparsity(series: EnergySeries, frac: float, seed: int) -> EnergySeries:
    """Mark exactly round(frac * n) uniformly random steps missing."""
    if not 0.0 <= frac < 1.0:
        raise ValueError("sparsity fraction must lie in [0, 1)")
    out = series.copy()
    k = int(round(frac * series.n))
    if k == 0:
        return out
    rng = np.random.default_rng(seed)
    drop = rng.choice(series.n, size=k, replace=False)
    out.present[drop] = False
    out.values[drop] = np.nan
    return out


def _check_aligned(*series: EnergySeries) -> None:
    ref = series[0].timestamps
    for s in series[1:]:
        if len(s.timestamps) != len(ref) or not np.array_equal(s.timestamps, ref):
            raise AlignmentError("series timestamps are not aligned")


def assemble_samples(dl_forecast: EnergySeries | None, ep_forecast: EnergySeries, truth: EnergySeries, scenario) -> list[MaskedSample]:
    """Turn aligned forecast/truth series into MaskedSamples for one scenario.

    ``scenario`` is duck-typed and must expose ``dl_available``,
    ``ep_available``, ``truth_mode`` ("full" | "sparse" | "absent") and
    ``imputation``.  An unavailable stream is zeroed with mask 0; a partially
    missing stream keeps mask 0 at the gaps but carries a neighbor-mean
    stand-in so no NaN ever reaches the model.  With ``truth_mode="absent"``
    the physics value doubles as a proxy target.
    """
    present_series = [s for s in (dl_forecast, ep_forecast, truth) if s is not None]
    _check_aligned(*present_series)
    n = truth.n

    def stream(fc: EnergySeries | None, available: bool) -> tuple[np.ndarray, np.ndarray]:
        if not available or fc is None:
            return np.zeros(n), np.zeros(n, dtype=np.int64)
        mask = fc.present.astype(np.int64)
        if np.all(fc.present):
            return fc.values.copy(), mask
        filled = impute(fc, "neighbor_mean_or_zero")
        return filled.values, mask

    dl_vals, dl_mask = stream(dl_forecast, scenario.dl_available)
    ep_vals, ep_mask = stream(ep_forecast, scenario.ep_available)

    if scenario.truth_mode == "absent":
        targets = ep_vals
        proxy = np.ones(n, dtype=bool)
        observed = np.zeros(n, dtype=bool)
    else:
        if np.all(truth.present):
            targets = truth.values
        else:
            targets = impute(truth, scenario.imputation).values
        proxy = np.zeros(n, dtype=bool)
        observed = truth.present.copy()

    return [
        MaskedSample(
            dl=float(dl_vals[i]),
            dl_mask=int(dl_mask[i]),
            ep=float(ep_vals[i]),
            ep_mask=int(ep_mask[i]),
            target=float(targets[i]),
            target_is_proxy=bool(proxy[i]),
            target_observed=bool(observed[i]),
        )
        for i in range(n)
    ]


@dataclass(frozen=True)
class NormStats:
    """Per-channel z-scoring statistics fitted on the training split only.

    Population standard deviation with a 1e-8 floor.  Masks are never
    normalized, and an all-missing channel keeps its zero stand-ins at
    exactly zero because its fallback stats are (0, floor).
    """

    dl_mean: float
    dl_std: float
    ep_mean: float
    ep_std: float
    y_mean: float
    y_std: float

    def as_dict(self) -> dict[str, float]:
        return {
            "dl_mean": self.dl_mean,
            "dl_std": self.dl_std,
            "ep_mean": self.ep_mean,
            "ep_std": self.ep_std,
            "y_mean": self.y_mean,
            "y_std": self.y_std,
        }


def _channel_stats(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, STD_FLOOR
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(max(arr.std(), STD_FLOOR))


def fit_norm_stats(train_samples: list[MaskedSample]) -> NormStats:
    """Channel means/stds over the training split.

    Only unmasked forecasts and genuinely observed targets contribute; if a
    scenario has no observed targets at all (proxy training) the target
    channel falls back to the proxy values so targets still normalize
    sensibly.
    """
    if not train_samples:
        raise ValueError("cannot fit normalization statistics on an empty split")
    dl_mean, dl_std = _channel_stats([s.dl for s in train_samples if s.dl_mask == 1])
    ep_mean, ep_std = _channel_stats([s.ep for s in train_samples if s.ep_mask == 1])
    observed = [s.target for s in train_samples if s.target is not None and s.target_observed]
    if not observed:
        observed = [s.target for s in train_samples if s.target is not None]
    y_mean, y_std = _channel_stats(observed)
    return NormStats(dl_mean, dl_std, ep_mean, ep_std, y_mean, y_std)


def normalize_samples(samples: list[MaskedSample], stats: NormStats) -> list[MaskedSample]:
    out = []
    for s in samples:
        target = None if s.target is None else (s.target - stats.y_mean) / stats.y_std
        out.append(
            replace(
                s,
                dl=(s.dl - stats.dl_mean) / stats.dl_std,
                ep=(s.ep - stats.ep_mean) / stats.ep_std,
                target=target,
            )
        )
    return out


def denormalize_target(values, stats: NormStats) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * stats.y_std + stats.y_mean


def split_samples(samples: list, spec: SplitSpec) -> tuple[list, list, list]:
    i_train, i_val = spec.boundaries(len(samples))
    return samples[:i_train], samples[i_train:i_val], samples[i_val:]


# ---------------------------------------------------------------------------
# CSV ingestion / emission
# ---------------------------------------------------------------------------

def _format_ts(ts: np.datetime64) -> str:
    return np.datetime_as_string(ts.astype("datetime64[m]"))


def read_energy_csv(path) -> EnergySeries:
    """Read `timestamp,value` rows; an empty field or literal NaN marks a
    missing step."""
    timestamps, values, present = [], [], []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["timestamp", "value"]:
            raise ValueError(f"{path}: expected header 'timestamp,value'")
        for row in reader:
            if not row:
                continue
            timestamps.append(np.datetime64(row[0].strip(), "h"))
            cell = row[1].strip() if len(row) > 1 else ""
            if cell == "" or cell.lower() == "nan":
                values.append(np.nan)
                present.append(False)
            else:
                values.append(float(cell))
                present.append(True)
    return EnergySeries(np.array(timestamps), np.array(values), np.array(present))


def write_energy_csv(series: EnergySeries, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("timestamp,value\n")
        for ts, v, ok in zip(series.timestamps, series.values, series.present):
            f.write(f"{_format_ts(ts)},{float(v)!r}\n" if ok else f"{_format_ts(ts)},\n")


def read_temperature_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read `timestamp,temp_c` rows; calendar features are derived, not stored."""
    timestamps, temps = [], []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["timestamp", "temp_c"]:
            raise ValueError(f"{path}: expected header 'timestamp,temp_c'")
        for row in reader:
            if not row:
                continue
            timestamps.append(np.datetime64(row[0].strip(), "h"))
            temps.append(float(row[1]))
    return np.array(timestamps), np.asarray(temps, dtype=np.float64)


def write_temperature_csv(timestamps: np.ndarray, temps: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("timestamp,temp_c\n")
        for ts, v in zip(timestamps, temps):
            f.write(f"{_format_ts(ts)},{float(v)!r}\n")


def build_feature_rows(energy: EnergySeries, temps: np.ndarray) -> list[FeatureRow]:
    """FeatureRows for every step from hour 24 on (earlier steps lack a full
    lag window).  Lags are taken from ``energy`` as-is, so feed an imputed
    series when the history has gaps."""
    if len(temps) != energy.n:
        raise AlignmentError(f"{len(temps)} temperatures for {energy.n} energy steps")
    if np.any(~energy.present):
        raise ValueError("lag source series must be fully present; impute first")
    rows = []
    for i in range(24, energy.n):
        ts = energy.timestamps[i]
        dt = ts.astype("datetime64[s]").item()
        rows.append(
            FeatureRow(
                timestamp=ts,
                temp_c=float(temps[i]),
                day_of_month=dt.day,
                day_of_year=dt.timetuple().tm_yday,
                day_of_week=dt.weekday(),
                hour=dt.hour,
                lags=energy.values[i - 24 : i].copy(),
            )
        )
    return rows
