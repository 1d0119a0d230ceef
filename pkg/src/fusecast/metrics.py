"""Forecast evaluation metrics and the per-run metric report."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _paired(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y, dtype=np.float64)
    b = np.asarray(yhat, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("metrics expect 1-D paired series")
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.size == 0:
        raise ValueError("empty series")
    return a, b


def mae(y, yhat) -> float:
    """Mean absolute error."""
    a, b = _paired(y, yhat)
    return float(np.mean(np.abs(a - b)))


def rmse(y, yhat) -> float:
    """Root mean squared error."""
    a, b = _paired(y, yhat)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def smape(y, yhat) -> float:
    """Symmetric mean absolute percentage error, bounded in [0, 200].

    Pairs with |y| + |yhat| = 0 contribute 0.
    """
    a, b = _paired(y, yhat)
    denom = (np.abs(a) + np.abs(b)) / 2.0
    terms = np.zeros_like(a)
    ok = denom > 0.0
    terms[ok] = np.abs(a[ok] - b[ok]) / denom[ok]
    return float(np.mean(terms) * 100.0)


def mean_error(y, yhat) -> float:
    """Mean signed error, y - yhat: over-prediction comes out negative."""
    a, b = _paired(y, yhat)
    return float(np.mean(a - b))


def nmbe(y, yhat) -> float:
    """Normalized mean bias error in percent: sum(y - yhat) / (N * mean(y)) * 100."""
    a, b = _paired(y, yhat)
    m = float(np.mean(a))
    if m == 0.0:
        raise ValueError("NMBE undefined for zero-mean actuals")
    return float(np.sum(a - b) / (a.size * m) * 100.0)


def cv_rmse(y, yhat) -> float:
    """Coefficient of variation of RMSE in percent: rmse / mean(y) * 100."""
    a, _ = _paired(y, yhat)
    m = float(np.mean(a))
    if m == 0.0:
        raise ValueError("CV-RMSE undefined for zero-mean actuals")
    return float(rmse(y, yhat) / m * 100.0)


@dataclass(frozen=True)
class MetricReport:
    """All evaluation metrics for one (actuals, predictions) pairing.

    Sign convention for ``mean_error`` and ``nmbe`` is y - yhat, so a model
    that under-predicts reports positive bias.
    """

    n: int
    mae: float
    rmse: float
    smape: float
    nmbe: float
    cv_rmse: float
    mean_error: float


CSV_HEADER = "scenario,method,n,mae,rmse,smape,nmbe,cv_rmse,mean_error"


def compute_report(y, yhat) -> MetricReport:
    a, _ = _paired(y, yhat)
    return MetricReport(
        n=int(a.size),
        mae=mae(y, yhat),
        rmse=rmse(y, yhat),
        smape=smape(y, yhat),
        nmbe=nmbe(y, yhat),
        cv_rmse=cv_rmse(y, yhat),
        mean_error=mean_error(y, yhat),
    )


def csv_row(scenario, method: str, report: MetricReport) -> str:
    """One CSV row matching CSV_HEADER, values at 6 significant digits."""
    vals = [report.mae, report.rmse, report.smape, report.nmbe, report.cv_rmse, report.mean_error]
    body = ",".join(f"{v:.6g}" for v in vals)
    return f"{scenario},{method},{report.n},{body}"
