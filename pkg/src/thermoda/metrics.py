"""Forecast accuracy measures on denormalized values.

All four measures pool every (window, horizon step) pair into one flat set
of truth/prediction points per target; nothing is averaged per window first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MetricError


def _flatten_checked(y_true, y_pred):
    yt = np.asarray(y_true, dtype=np.float64).ravel()
    yp = np.asarray(y_pred, dtype=np.float64).ravel()
    if yt.size == 0:
        raise MetricError("cannot score an empty set of points")
    if yt.shape != yp.shape:
        raise MetricError(f"truth has {yt.size} points but prediction has {yp.size}")
    if not (np.all(np.isfinite(yt)) and np.all(np.isfinite(yp))):
        raise MetricError("non-finite value in truth or prediction")
    return yt, yp


def rmse(y_true, y_pred) -> float:
    """sqrt(mean((y - yhat)^2)) over all pooled points."""
    yt, yp = _flatten_checked(y_true, y_pred)
    return float(np.sqrt(np.mean((yt - yp) ** 2)))


def cvrmse(y_true, y_pred) -> float:
    """100 * rmse / mean(y).

    Undefined when the truth mean is zero; that raises rather than returning
    an infinity.
    """
    yt, yp = _flatten_checked(y_true, y_pred)
    mu = float(np.mean(yt))
    if mu == 0.0:
        raise MetricError("cvrmse undefined: truth mean is zero")
    return float(100.0 * np.sqrt(np.mean((yt - yp) ** 2)) / mu)


def nmbe(y_true, y_pred) -> float:
    """100 * sum(y - yhat) / (N * mean(y)); over-prediction comes out negative."""
    yt, yp = _flatten_checked(y_true, y_pred)
    mu = float(np.mean(yt))
    if mu == 0.0:
        raise MetricError("nmbe undefined: truth mean is zero")
    return float(100.0 * np.sum(yt - yp) / (yt.size * mu))


def mape(y_true, y_pred):
    """100 * mean(|y - yhat| / |y|), skipping points where y == 0.

    Returns (value, excluded_count). All points zero raises.
    """
    yt, yp = _flatten_checked(y_true, y_pred)
    keep = yt != 0.0
    excluded = int(np.sum(~keep))
    if not np.any(keep):
        raise MetricError("mape undefined: every truth point is zero")
    value = float(100.0 * np.mean(np.abs(yt[keep] - yp[keep]) / np.abs(yt[keep])))
    return value, excluded


@dataclass(frozen=True)
class EvalReport:
    """All four measures for one target on one evaluation set."""

    target: str
    num_points: int
    rmse: float
    cvrmse: float
    nmbe: float
    mape: float
    mape_excluded: int

    def to_dict(self) -> dict:
        return {"target": self.target, "num_points": self.num_points,
                "rmse": self.rmse, "cvrmse": self.cvrmse, "nmbe": self.nmbe,
                "mape": self.mape, "mape_excluded": self.mape_excluded}

    def row(self) -> list:
        """Values in report column order: cvrmse, nmbe, mape, rmse."""
        return [self.cvrmse, self.nmbe, self.mape, self.rmse]


def evaluate(y_true, y_pred, target_names) -> list:
    """Score stacked horizons per target.

    y_true/y_pred are (num_windows, horizon, num_targets); each target is
    pooled across the first two axes and scored independently.
    """
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.ndim != 3 or yp.shape != yt.shape:
        raise MetricError(
            f"expected matching (windows, horizon, targets) stacks, "
            f"got {yt.shape} and {yp.shape}")
    if yt.shape[2] != len(target_names):
        raise MetricError(
            f"{yt.shape[2]} target columns but {len(target_names)} names")
    reports = []
    for j, name in enumerate(target_names):
        t = yt[:, :, j]
        p = yp[:, :, j]
        m, excluded = mape(t, p)
        reports.append(EvalReport(
            target=name, num_points=int(t.size), rmse=rmse(t, p),
            cvrmse=cvrmse(t, p), nmbe=nmbe(t, p), mape=m,
            mape_excluded=excluded))
    return reports
