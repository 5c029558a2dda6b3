"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .aero import elevon_mix
from .exceptions import NonMonotonicTime, SchemaError
from .sensors import N_OBS, OBS_NAMES, MeasurementLog

CONTROL_COLUMNS = ("delta_a", "delta_e", "delta_p")
ELEVON_COLUMNS = ("delta_L", "delta_R")
FLOW_COLUMNS = ("alpha_m", "beta_m")


def check_monotonic(t, strict=False):
    t = np.asarray(t, dtype=float)
    d = np.diff(t)
    bad = (d <= 0) if strict else (d < 0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NonMonotonicTime(f"time decreases at row {i + 1}: {t[i]} -> {t[i + 1]}")
    return t


def log_from_frame(df) -> MeasurementLog:
    """
    Build a :class:`MeasurementLog` from a table with the log column schema.

    Controls may be given as ``delta_a, delta_e`` or as elevon pairs
    ``delta_L, delta_R``; ``delta_p`` is always required.
    """
    cols = set(df.columns)
    missing = [c for c in ("t",) + OBS_NAMES if c not in cols]
    if missing:
        raise SchemaError(f"log is missing column(s): {', '.join(missing)}", key=missing[0])
    if "delta_p" not in cols:
        raise SchemaError("log is missing throttle column delta_p", key="delta_p")
    if {"delta_a", "delta_e"} <= cols:
        da, de = df["delta_a"].to_numpy(float), df["delta_e"].to_numpy(float)
    elif set(ELEVON_COLUMNS) <= cols:
        da, de = elevon_mix(df["delta_L"].to_numpy(float), df["delta_R"].to_numpy(float))
    else:
        raise SchemaError("log needs delta_a/delta_e or delta_L/delta_R control columns",
                          key="delta_a")
    controls = np.column_stack([da, de, df["delta_p"].to_numpy(float)])
    flow = None
    if set(FLOW_COLUMNS) <= cols:
        flow = df[list(FLOW_COLUMNS)].to_numpy(float)
    z = df[list(OBS_NAMES)].to_numpy(float)
    return MeasurementLog(df["t"].to_numpy(float), z, controls, flow)


def check_log(X) -> MeasurementLog:
    """
    Coerce ``X`` to a validated :class:`MeasurementLog`.

    Accepts a ``MeasurementLog``, a pandas DataFrame with the log schema or a
    mapping of column arrays.
    """
    if isinstance(X, MeasurementLog):
        log = X
    elif hasattr(X, "columns"):
        log = log_from_frame(X)
    elif isinstance(X, dict):
        import pandas as pd

        log = log_from_frame(pd.DataFrame(X))
    else:
        raise TypeError(f"expected MeasurementLog or DataFrame, got {type(X).__name__}")
    n = len(log.t)
    if log.z.shape != (n, N_OBS):
        raise SchemaError(f"observation array must be ({n}, {N_OBS}), got {log.z.shape}")
    if log.controls.shape != (n, 3):
        raise SchemaError(f"controls must be ({n}, 3), got {log.controls.shape}")
    if not np.all(np.isfinite(log.controls)):
        raise SchemaError("controls contain missing values", key="delta_p")
    check_monotonic(log.t)
    return log
