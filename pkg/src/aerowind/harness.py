"""Flight-log replay and the runtime benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .amae import AmaeConfig, WindowBuffer, smooth
from .ekf import EkfState, initial_state, predict, update
from .evaluation import (
    COMPONENTS,
    PipelineResult,
    direct_wind_series,
    estimate_log,
    interpolate_gnss,
    rmse,
)
from .exceptions import NoAvailableRows, NonMonotonicTime, SchemaError
from .sensors import MeasurementLog
from .validation import check_log


@dataclass
class ReplayResult:
    log: MeasurementLog
    pipeline: PipelineResult
    direct: np.ndarray | None
    report: pd.DataFrame


def log_dt(log: MeasurementLog, nominal=None):
    """
    Step of a uniformly sampled log.

    ``nominal`` is returned when the log agrees with it, so a log exported on
    a known grid replays with bit-identical filter steps; the median spacing
    otherwise carries the rounding of the written time stamps.
    """
    if len(log) < 2:
        return 0.01 if nominal is None else nominal
    d = np.diff(log.t)
    if np.any(d <= 0):
        i = int(np.flatnonzero(d <= 0)[0])
        raise NonMonotonicTime(f"log time does not increase at row {i + 1} (t={log.t[i + 1]})")
    dt = float(np.median(d))
    if np.max(np.abs(d - dt)) > 1e-6 + 1e-3 * dt:
        raise SchemaError("log is not uniformly sampled; resample it onto a fixed grid first",
                          key="t")
    if nominal is not None and abs(dt - nominal) <= 1e-9 * nominal:
        return float(nominal)
    return dt


def replay_report(pipe: PipelineResult, direct, warmup):
    """
    EKF and EKF+AMAE error against the direct-calculation reference, or a
    table marked unavailable when the log has no vane angles.
    """
    rows = []
    for method, wind in (("EKF", pipe.wind_ekf), ("EKF+AMAE", pipe.wind_amae)):
        if wind is None:
            continue
        row = {"method": method, "reference": "available" if direct is not None else "unavailable",
               "warmup_s": warmup}
        for c in COMPONENTS:
            row[c] = rmse(wind, direct, c, pipe.t, warmup) if direct is not None else np.nan
        rows.append(row)
    return pd.DataFrame(rows, columns=["method", "reference", "warmup_s", *COMPONENTS])


def replay(log, config, gnss="interpolate", warmup=None, use_amae=None) -> ReplayResult:
    """
    Run the estimation pipeline over a recorded log.

    Parameters
    ----------
    log : MeasurementLog or DataFrame
    config : RunConfig
    gnss : {"interpolate", "mask"}
        ``interpolate`` fills GNSS rows onto every tick by linear
        interpolation (as for real logs with slower GNSS); ``mask`` keeps the
        log's own availability pattern.
    """
    log = check_log(log)
    dt = log_dt(log, config.flight["dt"])
    if gnss == "interpolate":
        log = interpolate_gnss(log)
    elif gnss != "mask":
        raise ValueError("gnss must be 'interpolate' or 'mask'")
    warmup = config.evaluation["warmup"] if warmup is None else warmup
    use_amae = config.use_amae if use_amae is None else use_amae
    opts = {"sensor_spec": config.sensors, **config.ekf_options, "dt": dt}
    pipe = estimate_log(log, config.params, config.estimator_aero, opts, config.amae_options,
                        use_amae, config.smooth_full_state)
    direct = direct_wind_series(log) if log.has_flow else None
    report = replay_report(pipe, direct, warmup) if len(log) else pd.DataFrame()
    return ReplayResult(log, pipe, direct, report)


@dataclass
class BenchmarkReport:
    steps: int
    duration: float
    wall_time: float
    predict_us: float
    update_us: float
    amae_us: float

    @property
    def realtime_factor(self):
        return self.duration / self.wall_time if self.wall_time > 0 else float("inf")

    def as_frame(self):
        return pd.DataFrame([{
            "steps": self.steps, "data_s": self.duration, "wall_s": self.wall_time,
            "realtime_factor": self.realtime_factor, "predict_us": self.predict_us,
            "update_us": self.update_us, "amae_us": self.amae_us}])


def benchmark(log: MeasurementLog, params, aero=None, ekf_options=None, amae_options=None,
              use_amae=True) -> BenchmarkReport:
    """
    Time the estimation pipeline on ``log``.

    Wall time is measured on the production path (:func:`estimate_log`).
    A second pass over the same log times predict, update and smoother steps
    individually. The log's own duration is the real-time reference.
    """
    n = len(log)
    duration = n * log_dt(log) if n else 0.0
    t0 = time.perf_counter()
    pipe = estimate_log(log, params, aero, ekf_options, amae_options, use_amae)
    wall = time.perf_counter() - t0
    if n == 0:
        return BenchmarkReport(0, 0.0, wall, 0.0, 0.0, 0.0)

    cfg = pipe.ekf.config_
    t_pred = t_upd = t_amae = 0.0
    state = EkfState(initial_state(log.frame(0)), cfg.P0.copy(), float(log.t[0]))
    amae_cfg = AmaeConfig(**(amae_options or {}))
    buf = WindowBuffer(amae_cfg.T1, amae_cfg.T2)
    for k in range(n):
        if k > 0:
            a = time.perf_counter()
            state = predict(state, log.controls[k - 1], cfg)
            t_pred += time.perf_counter() - a
        a = time.perf_counter()
        try:
            state = update(state, log.frame(k), log.controls[k], cfg)
        except NoAvailableRows:
            pass
        t_upd += time.perf_counter() - a
        if use_amae:
            a = time.perf_counter()
            buf.push(log.t[k], state.x[9:12])
            smooth(state.x[9:12], buf, amae_cfg)
            t_amae += time.perf_counter() - a
    us = 1e6
    return BenchmarkReport(n, duration, wall, us * t_pred / max(n - 1, 1), us * t_upd / n,
                           us * t_amae / n)
