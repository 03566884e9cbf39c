"""Synthetic building telemetry from a first-order thermal balance.

Indoor temperature follows a discrete RC recurrence driven by outdoor
temperature (diurnal sinusoid plus weather noise) and an HVAC input from a
thermostat-like controller:

    T[k+1] = a T[k] + b T_out[k] + c u[k] + sigma eta[k],  a + b + c = 1

with a the retain fraction. Keeping the coefficients on the simplex makes
the map a contraction toward a convex combination of its drivers, so
trajectories stay bounded for any bounded forcing. The generator also emits
an interval energy column proportional to |u| (plus fan baseline) so the
same physics can serve either a temperature or an energy forecasting task.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .data import TimeSeriesTable

DAY_SECONDS = 86400.0


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for one synthetic building."""

    rows: int
    seed: int
    sample_period: int = 900          # seconds
    retain: float = 0.93              # coefficient a; b and c split the rest
    outdoor_mean: float = 12.0        # degrees C
    outdoor_amplitude: float = 8.0    # diurnal swing, degrees C
    outdoor_phase: float = 0.0        # radians
    weather_noise: float = 2.0        # stationary sd of the slow wander, degrees C
    setpoint_day: float = 21.5        # occupied-hours target, degrees C
    setpoint_night: float = 17.0
    control_gain: float = 0.9         # proportional thermostat gain
    noise: float = 0.08               # sigma on the temperature recurrence
    energy_scale: float = 1.6         # kW per unit of |u|
    energy_baseline: float = 0.25     # kW of always-on load
    extra_features: int = 0           # nuisance columns, for layout experiments
    start_epoch: int = 1577836800     # 2020-01-01T00:00:00Z

    def __post_init__(self):
        if self.rows < 2:
            raise ConfigError(f"rows must be >= 2, got {self.rows}")
        if self.sample_period < 1:
            raise ConfigError("sample_period must be >= 1 second")
        if not (0.0 < self.retain < 1.0):
            raise ConfigError(f"retain must be in (0, 1), got {self.retain}")
        if self.noise < 0 or self.weather_noise < 0:
            raise ConfigError("noise levels must be non-negative")
        if self.extra_features < 0:
            raise ConfigError("extra_features must be >= 0")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _outdoor_series(cfg: SynthConfig, rng) -> np.ndarray:
    """Diurnal sinusoid plus a slow AR(1) weather deviation.

    The wander uses coefficient 0.99 with shocks scaled so its stationary
    standard deviation equals weather_noise; its correlation time of about
    a hundred samples gives the series multi-hour structure that a forecast
    model can exploit.
    """
    t = np.arange(cfg.rows) * cfg.sample_period
    base = cfg.outdoor_mean + cfg.outdoor_amplitude * np.sin(
        2.0 * np.pi * t / DAY_SECONDS + cfg.outdoor_phase)
    ar = 0.99
    shocks = rng.normal(0.0, cfg.weather_noise * np.sqrt(1.0 - ar * ar),
                        size=cfg.rows)
    wander = np.empty(cfg.rows)
    wander[0] = shocks[0] / np.sqrt(1.0 - ar * ar)
    for k in range(1, cfg.rows):
        wander[k] = ar * wander[k - 1] + shocks[k]
    return base + wander


def _setpoint_series(cfg: SynthConfig) -> np.ndarray:
    t = cfg.start_epoch + np.arange(cfg.rows) * cfg.sample_period
    hour = (t % int(DAY_SECONDS)) / 3600.0
    occupied = (hour >= 7.0) & (hour < 21.0)
    return np.where(occupied, cfg.setpoint_day, cfg.setpoint_night)


def synth_building(cfg: SynthConfig) -> TimeSeriesTable:
    """Simulate one building; deterministic for a fixed config.

    Columns: temperature (target candidate), outdoor, setpoint, hvac,
    energy (target candidate), plus extra_{i} nuisance features if asked.
    """
    rng = np.random.default_rng(cfg.seed)
    outdoor = _outdoor_series(cfg, rng)
    setpoint = _setpoint_series(cfg)
    eta = rng.normal(0.0, 1.0, size=cfg.rows)

    # a + b + c = 1 keeps the recurrence a convex combination of its drivers
    a = cfg.retain
    leak = 1.0 - a
    b = leak * 0.45
    c = leak * 0.55

    # Thermostat: feedforward sized for the climate mean, so actual weather
    # still pushes the room off setpoint, plus proportional feedback.
    def control(sp, t):
        ff = (leak * sp - b * cfg.outdoor_mean) / c
        return float(np.clip(ff + cfg.control_gain * (sp - t), -45.0, 45.0))

    temp = np.empty(cfg.rows)
    u = np.empty(cfg.rows)
    temp[0] = setpoint[0]
    for k in range(cfg.rows - 1):
        u[k] = control(setpoint[k], temp[k])
        temp[k + 1] = a * temp[k] + b * outdoor[k] + c * u[k] + cfg.noise * eta[k]
    u[-1] = control(setpoint[-1], temp[-1])

    energy = cfg.energy_baseline + cfg.energy_scale * np.abs(u) / 10.0
    timestamps = cfg.start_epoch + np.arange(cfg.rows, dtype=np.int64) * cfg.sample_period

    columns = {"temperature": temp, "outdoor": outdoor, "setpoint": setpoint,
               "hvac": u, "energy": energy}
    features = ["temperature", "outdoor", "setpoint", "hvac"]
    for i in range(cfg.extra_features):
        name = f"extra_{i}"
        columns[name] = rng.normal(0.0, 1.0, size=cfg.rows)
        features.append(name)

    return TimeSeriesTable(timestamps, columns, features, ["temperature"],
                           cfg.sample_period)
