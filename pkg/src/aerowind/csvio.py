"""
CSV files written and read by the command-line tools.

All files have one header row and one sample per row, SI units (angles in
rad unless the column ends in ``_deg``). An empty cell means "not
available". Floats are written with 17 significant digits so a write/read
round trip is exact.

``measurements.csv`` (the flight-log schema, also accepted by ``replay``)

=========================  ======  =========================================
column                     unit    meaning
=========================  ======  =========================================
t                          s       sample time
Vx, Vy, Vz                 m/s     GNSS ground velocity, north-east-down
p, q, r                    rad/s   body rates
psi, theta, phi            rad     attitude (yaw, pitch, roll)
ax, ay, az                 m/s^2   body acceleration including gravity term
V                          m/s     airspeed
alpha_m, beta_m            rad     optional vane angle of attack / sideslip
delta_a, delta_e           rad     control surfaces, or delta_L, delta_R
delta_p                    1       throttle in [0, 1]
=========================  ======  =========================================

``truth.csv`` adds position ``pn, pe, pd``, true states, steady/gust/total
wind and the true acceleration. ``estimates.csv`` holds the filter states,
smoothed wind (``amae_wx`` ...), derived airspeed, flow angles and
coefficients, plus the direct-calculation wind when vanes were present.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from .ekf import STATE_NAMES
from .sensors import OBS_NAMES, MeasurementLog
from .validation import CONTROL_COLUMNS, FLOW_COLUMNS, check_log, log_from_frame

FLOAT_FORMAT = "%.17g"
TRUTH_COLUMNS = (("t", "pn", "pe", "pd", "u", "v", "w", "p", "q", "r", "psi", "theta", "phi")
                 + ("wx", "wy", "wz", "wx_steady", "wy_steady", "wz_steady",
                    "gust_u", "gust_v", "gust_w", "ax_true", "ay_true", "az_true")
                 + CONTROL_COLUMNS)


def write_csv(df: pd.DataFrame, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    return path


def read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def log_to_frame(log: MeasurementLog) -> pd.DataFrame:
    cols = {"t": log.t}
    for i, name in enumerate(OBS_NAMES):
        cols[name] = log.z[:, i]
    if log.flow is not None:
        for i, name in enumerate(FLOW_COLUMNS):
            cols[name] = log.flow[:, i]
    for i, name in enumerate(CONTROL_COLUMNS):
        cols[name] = log.controls[:, i]
    return pd.DataFrame(cols)


def write_log(log: MeasurementLog, path):
    return write_csv(log_to_frame(log), path)


def read_log(path, constant_throttle=None) -> MeasurementLog:
    """
    Load a flight log CSV.

    ``constant_throttle`` fills a missing ``delta_p`` column; without it a log
    lacking throttle is rejected, since thrust enters the acceleration model.
    """
    df = read_csv(path)
    if "delta_p" not in df.columns and constant_throttle is not None:
        df["delta_p"] = float(constant_throttle)
    return check_log(log_from_frame(df))


def truth_to_frame(sim) -> pd.DataFrame:
    data = np.column_stack([sim.t, sim.states, sim.wind, sim.wind_steady, sim.wind_gust,
                            sim.accel, sim.controls])
    return pd.DataFrame(data, columns=list(TRUTH_COLUMNS))


def estimates_to_frame(pipe, direct=None) -> pd.DataFrame:
    cols = {"t": pipe.t}
    for i, name in enumerate(STATE_NAMES):
        cols[name] = pipe.states[:, i]
    if pipe.wind_amae is not None:
        for i, ax in enumerate(("wx", "wy", "wz")):
            cols[f"amae_{ax}"] = pipe.wind_amae[:, i]
    for name, values in pipe.derived.items():
        cols[name] = values
    if direct is not None:
        for i, ax in enumerate(("wx", "wy", "wz")):
            cols[f"direct_{ax}"] = direct[:, i]
    return pd.DataFrame(cols)
