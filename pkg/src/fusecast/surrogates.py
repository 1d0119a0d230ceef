"""Stand-in forecast sources.

simulate_physics is a single-zone lumped RC building model driven by a
setpoint thermostat: the envelope is one conductance (UA plus an
infiltration term), the interior one capacitance, and each hour the HVAC
power is solved in closed form from the discrete heat balance

    T_in[t+1] = T_in[t] + dt/C * (UA*(T_out[t] - T_in[t]) + Q_int[t] + Q_hvac[t])

so the zone lands exactly on the active setpoint whenever it would drift
outside the band.  make_weather and make_truth generate the seeded synthetic
year around it, and train_baseline_forecaster fits a small feed-forward
net on lagged energy + calendar + temperature as the data-driven source.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numkit import AdamState, adam_step
from .pipeline import EnergySeries, FeatureRow, SplitSpec, hour_of_day, hour_of_week, hourly_range

OCCUPANT_HEAT_W = 100.0        # sensible heat per person at light activity
AIR_HEAT_W_PER_K_M3H = 0.335   # rho * c_p / 3600 for air, per m3/h of airflow
CEILING_HEIGHT_M = 3.0
SOLAR_APERTURE_FRAC = 0.05     # effective solar-collecting fraction of floor area
COLDEST_HOUR = 336             # seasonal minimum lands mid-January
DT_S = 3600.0


@dataclass(frozen=True)
class BuildingParams:
    """Lumped single-zone building description."""

    ua_w_per_k: float = 2808.0            # 0.351 W/m2K over an 8000 m2 envelope
    capacitance_j_per_k: float = 1.2e9
    equipment_w_per_m2: float = 20.5
    floor_area_m2: float = 6000.0
    occupants: float = 495.0
    heat_setpoint_c: float = 21.0
    cool_setpoint_c: float = 23.0
    heat_setback_c: float = 15.0
    cool_setback_c: float = 28.0
    infiltration_ach: float = 0.7
    hvac_efficiency: float = 3.0

    def __post_init__(self):
        for name in ("ua_w_per_k", "capacitance_j_per_k", "floor_area_m2", "hvac_efficiency"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("equipment_w_per_m2", "occupants", "infiltration_ach"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.heat_setpoint_c < self.cool_setpoint_c:
            raise ValueError("heating setpoint must be below cooling setpoint")
        if not self.heat_setback_c < self.cool_setback_c:
            raise ValueError("heating setback must be below cooling setback")

    @property
    def ua_effective(self) -> float:
        """Envelope conductance plus the infiltration air-change term."""
        volume = self.floor_area_m2 * CEILING_HEIGHT_M
        return self.ua_w_per_k + AIR_HEAT_W_PER_K_M3H * self.infiltration_ach * volume


BUILDING_CONFIG_KEYS = (
    "ua_w_per_k", "capacitance_j_per_k", "equipment_w_per_m2", "floor_area_m2",
    "occupants", "heat_setpoint_c", "cool_setpoint_c", "heat_setback_c",
    "cool_setback_c", "infiltration_ach", "hvac_efficiency",
)


def load_building_params(path) -> BuildingParams:
    """Read a flat key=value file; unknown keys are rejected."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in BUILDING_CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = float(val.strip())
    return BuildingParams(**values)


@dataclass
class WeatherSeries:
    """Hourly outdoor dry-bulb temperature plus a solar-gain proxy."""

    timestamps: np.ndarray
    temp_c: np.ndarray
    solar_w_per_m2: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps).astype("datetime64[h]")
        self.temp_c = np.asarray(self.temp_c, dtype=np.float64)
        self.solar_w_per_m2 = np.asarray(self.solar_w_per_m2, dtype=np.float64)
        if not (len(self.timestamps) == len(self.temp_c) == len(self.solar_w_per_m2)):
            raise ValueError("weather arrays must have equal length")
        if not (np.all(np.isfinite(self.temp_c)) and np.all(np.isfinite(self.solar_w_per_m2))):
            raise ValueError("weather values must be finite")

    @property
    def n(self) -> int:
        return len(self.temp_c)


@dataclass
class OccupancySchedule:
    """Per hour-of-week occupancy fraction (168 entries, Monday hour 0 first)."""

    fractions: np.ndarray

    def __post_init__(self):
        self.fractions = np.asarray(self.fractions, dtype=np.float64)
        if self.fractions.shape != (168,):
            raise ValueError("occupancy schedule needs exactly 168 entries")
        if np.any(self.fractions < 0) or np.any(self.fractions > 1):
            raise ValueError("occupancy fractions must lie in [0, 1]")

    def at(self, timestamps: np.ndarray) -> np.ndarray:
        return self.fractions[hour_of_week(np.atleast_1d(timestamps))]


def default_occupancy() -> OccupancySchedule:
    """Residential pattern: full nights/evenings, daytime dips on weekdays,
    busier weekends."""
    frac = np.empty(168)
    for how in range(168):
        dow, hod = divmod(how, 24)
        weekend = dow >= 5
        if 9 <= hod < 17:
            frac[how] = 0.65 if weekend else 0.30
        elif 7 <= hod < 9 or 17 <= hod < 19:
            frac[how] = 0.75
        else:
            frac[how] = 0.95
    return OccupancySchedule(frac)


def make_weather(
    year_hours: int = 8760,
    seed: int = 0,
    *,
    start: str = "2021-01-01T00",
    mean_c: float = 7.5,
    seasonal_amp_c: float = 14.0,
    diurnal_amp_c: float = 4.5,
    noise_amp_c: float = 1.5,
) -> WeatherSeries:
    """Synthetic typical-year weather: a seasonal plus a diurnal sinusoid and
    seeded smooth (AR(1)) noise.  With noise_amp_c=0 the values are exactly
    the analytic double sinusoid; the coldest hour falls on a mid-January
    night and the warmest on a mid-July afternoon."""
    timestamps = hourly_range(start, year_hours)
    h = np.arange(year_hours)
    hod = h % 24
    seasonal = -seasonal_amp_c * np.cos(2.0 * np.pi * (h - COLDEST_HOUR) / 8760.0)
    diurnal = diurnal_amp_c * np.cos(2.0 * np.pi * (hod - 15) / 24.0)
    temp = mean_c + seasonal + diurnal
    if noise_amp_c > 0:
        rng = np.random.default_rng(seed)
        eps = rng.standard_normal(year_hours)
        phi = 0.97
        ar = np.empty(year_hours)
        ar[0] = eps[0]
        for t in range(1, year_hours):
            ar[t] = phi * ar[t - 1] + np.sqrt(1.0 - phi * phi) * eps[t]
        temp = temp + noise_amp_c * ar

    day_shape = np.maximum(np.sin(np.pi * (hod - 6) / 12.0), 0.0)
    season_level = 0.55 - 0.45 * np.cos(2.0 * np.pi * (h - COLDEST_HOUR) / 8760.0)
    solar = 800.0 * day_shape * season_level
    return WeatherSeries(timestamps, temp, solar)


def simulate_physics(
    params: BuildingParams,
    weather: WeatherSeries,
    schedule: OccupancySchedule,
    t_init_c: float | None = None,
) -> EnergySeries:
    """Hourly kWh from the RC zone under thermostat control.

    The zone starts at ``t_init_c`` (default: middle of the occupied band).
    Deterministic: the only randomness in the whole fixture lives in the
    weather and truth generators.
    """
    n = weather.n
    occ = schedule.at(weather.timestamps)
    ua = params.ua_effective
    c_per_dt = params.capacitance_j_per_k / DT_S
    dt_per_c = DT_S / params.capacitance_j_per_k
    area = params.floor_area_m2
    base_gain = params.occupants * OCCUPANT_HEAT_W + params.equipment_w_per_m2 * area
    solar_gain = SOLAR_APERTURE_FRAC * area * weather.solar_w_per_m2

    energy = np.empty(n)
    t_in = 0.5 * (params.heat_setpoint_c + params.cool_setpoint_c) if t_init_c is None else float(t_init_c)
    for t in range(n):
        occupied = occ[t] >= 0.5
        heat_sp = params.heat_setpoint_c if occupied else params.heat_setback_c
        cool_sp = params.cool_setpoint_c if occupied else params.cool_setback_c
        q_int = occ[t] * base_gain + solar_gain[t]
        passive = ua * (weather.temp_c[t] - t_in) + q_int
        t_free = t_in + dt_per_c * passive
        if t_free < heat_sp:
            q_hvac = c_per_dt * (heat_sp - t_in) - passive
            t_next = heat_sp
        elif t_free > cool_sp:
            q_hvac = c_per_dt * (cool_sp - t_in) - passive
            t_next = cool_sp
        else:
            q_hvac = 0.0
            t_next = t_free
        electric_w = abs(q_hvac) / params.hvac_efficiency + params.equipment_w_per_m2 * area * occ[t]
        energy[t] = electric_w / 1000.0
        t_in = t_next
    if np.any(energy < 0):
        raise ValueError("physics surrogate produced negative energy")
    return EnergySeries.full(weather.timestamps, energy)


def weekly_behavior_pattern(timestamps: np.ndarray) -> np.ndarray:
    """Fixed, roughly zero-mean occupant-behavior shape over the week."""
    how = hour_of_week(timestamps)
    hod = hour_of_day(timestamps)
    return np.sin(2.0 * np.pi * how / 168.0) + 0.5 * np.sin(2.0 * np.pi * (hod - 18) / 24.0)


def make_truth(
    physics: EnergySeries,
    bias: float,
    noise_std: float,
    behavior_amp: float,
    seed: int,
) -> EnergySeries:
    """Synthetic ground truth: the physics trace shifted by a constant bias,
    a weekly behavior pattern, and seeded iid noise, clamped at 0 kWh."""
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    vals = physics.values + bias + behavior_amp * weekly_behavior_pattern(physics.timestamps)
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        vals = vals + noise_std * rng.standard_normal(physics.n)
    return EnergySeries.full(physics.timestamps, np.maximum(vals, 0.0))


# ---------------------------------------------------------------------------
# Data-driven baseline: a two-hidden-layer feed-forward net on
# (24 lags + calendar + temperature) -> next-hour kWh, with recursive
# 24-hour rollout at prediction time.
# ---------------------------------------------------------------------------

N_FEATURES = 29


def _feature_matrix(rows: list[FeatureRow]) -> np.ndarray:
    x = np.empty((len(rows), N_FEATURES))
    for i, r in enumerate(rows):
        x[i, :24] = r.lags
        x[i, 24] = r.temp_c
        x[i, 25] = r.day_of_month
        x[i, 26] = r.day_of_year
        x[i, 27] = r.day_of_week
        x[i, 28] = r.hour
    return x


@dataclass
class BaselineForecaster:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: float
    feat_mean: np.ndarray
    feat_std: np.ndarray
    y_mean: float
    y_std: float

    def predict_matrix(self, x_raw: np.ndarray) -> np.ndarray:
        x = (x_raw - self.feat_mean) / self.feat_std
        h1 = np.maximum(x @ self.w1.T + self.b1, 0.0)
        h2 = np.maximum(h1 @ self.w2.T + self.b2, 0.0)
        out = h2 @ self.w3 + self.b3
        return out * self.y_std + self.y_mean


def train_baseline_forecaster(
    features: list[FeatureRow],
    truth: EnergySeries,
    split: SplitSpec,
    seed: int,
    *,
    hidden: int = 32,
    eta: float = 3e-3,
    max_epochs: int = 200,
    batch_size: int = 256,
    patience: int = 10,
) -> BaselineForecaster:
    """Fit the baseline on the training split only (z-scored inputs/targets,
    Adam on mean squared error, early stopping on the validation split)."""
    ts_to_idx = {ts: i for i, ts in enumerate(truth.timestamps.tolist())}
    targets = np.array([truth.values[ts_to_idx[r.timestamp.tolist()]] for r in features])
    if np.any(~np.isfinite(targets)):
        raise ValueError("baseline targets must be fully present; impute first")
    x_all = _feature_matrix(features)

    n = len(features)
    i_train, i_val = split.boundaries(n)
    if i_train < 8:
        raise ValueError("not enough training rows for the baseline forecaster")
    x_train, y_train = x_all[:i_train], targets[:i_train]
    x_val, y_val = x_all[i_train:i_val], targets[i_train:i_val]

    feat_mean = x_train.mean(axis=0)
    feat_std = np.maximum(x_train.std(axis=0), 1e-8)
    y_mean = float(y_train.mean())
    y_std = float(max(y_train.std(), 1e-8))
    xt = (x_train - feat_mean) / feat_std
    yt = (y_train - y_mean) / y_std
    xv = (x_val - feat_mean) / feat_std
    yv = (y_val - y_mean) / y_std

    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        b = np.sqrt(1.0 / fan_in)
        return rng.uniform(-b, b, size=shape)

    w1, b1 = uniform((hidden, N_FEATURES), N_FEATURES), np.zeros(hidden)
    w2, b2 = uniform((hidden, hidden), hidden), np.zeros(hidden)
    w3, b3 = uniform((hidden,), hidden), 0.0

    weights = [w1, b1, w2, b2, w3, np.asarray(b3)]
    state = AdamState.init(weights, eta=eta)

    def forward_batch(x, w):
        a1 = x @ w[0].T + w[1]
        h1 = np.maximum(a1, 0.0)
        a2 = h1 @ w[2].T + w[3]
        h2 = np.maximum(a2, 0.0)
        out = h2 @ w[4] + float(w[5])
        return a1, h1, a2, h2, out

    best_val = np.inf
    best_weights = [np.array(w) for w in weights]
    stall = 0
    for _epoch in range(max_epochs):
        perm = rng.permutation(len(xt))
        for s in range(0, len(xt), batch_size):
            idx = perm[s : s + batch_size]
            xb, yb = xt[idx], yt[idx]
            a1, h1, a2, h2, out = forward_batch(xb, weights)
            dout = 2.0 * (out - yb) / len(idx)
            g_w3 = h2.T @ dout
            g_b3 = np.asarray(np.sum(dout))
            da2 = np.outer(dout, weights[4]) * (a2 > 0)
            g_w2 = da2.T @ h1
            g_b2 = da2.sum(axis=0)
            da1 = (da2 @ weights[2]) * (a1 > 0)
            g_w1 = da1.T @ xb
            g_b1 = da1.sum(axis=0)
            weights, state = adam_step(weights, [g_w1, g_b1, g_w2, g_b2, g_w3, g_b3], state)
        if len(xv):
            _, _, _, _, vout = forward_batch(xv, weights)
            val_mse = float(np.mean((vout - yv) ** 2))
            if val_mse < best_val:
                best_val = val_mse
                best_weights = [np.array(w) for w in weights]
                stall = 0
            else:
                stall += 1
                if stall >= patience:
                    break
        else:
            best_weights = weights

    w = best_weights
    return BaselineForecaster(
        w1=w[0], b1=w[1], w2=w[2], b2=w[3], w3=w[4], b3=float(w[5]),
        feat_mean=feat_mean, feat_std=feat_std, y_mean=y_mean, y_std=y_std,
    )


def forecast_dl(forecaster: BaselineForecaster, features: list[FeatureRow]) -> EnergySeries:
    """Per-hour predictions over all feature rows, produced day-ahead: each
    24-hour block starts from the true lags at its first row and then feeds
    predictions back into the lag window (recursive rollout)."""
    n = len(features)
    if n == 0:
        raise ValueError("no feature rows to forecast")
    x_all = _feature_matrix(features)
    out = np.empty(n)
    block_starts = np.arange(0, n, 24)
    lag_buf = {int(b): x_all[b, :24].copy() for b in block_starts}
    for j in range(24):
        rows = block_starts[block_starts + j < n] + j
        if len(rows) == 0:
            break
        x = x_all[rows].copy()
        for k, r in enumerate(rows):
            x[k, :24] = lag_buf[int(r - j)]
        preds = forecaster.predict_matrix(x)
        out[rows] = preds
        for k, r in enumerate(rows):
            buf = lag_buf[int(r - j)]
            buf[:-1] = buf[1:]
            buf[-1] = preds[k]
    timestamps = np.array([r.timestamp for r in features])
    return EnergySeries.full(timestamps, out)
