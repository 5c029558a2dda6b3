"""
Run configuration: YAML file with one section per subsystem.

Every key has a default except the airframe's inertia and thrust gain, which
must be given. Units are SI unless the key name carries a ``_deg`` suffix.
The schema below is the documentation; ``load_config`` rejects unknown keys
and suggests the nearest valid one.
"""

from __future__ import annotations

import copy
import dataclasses
import difflib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .aero import AeroCoefficients, Geometry, ThrustModel, apply_perturbation
from .dynamics import RigidBodyParams
from .exceptions import MissingPhysicalConstant, ParseError, SchemaError
from .sensors import SensorSpec
from .wind import SCENARIOS, DrydenParams, WindScenario

REQUIRED = object()
_NUMBER = (int, float)

#: key -> default; nested dicts are sections. ``None`` marks an optional value.
SCHEMA = {
    "vehicle": {
        "mass": 4.0,                 # kg
        "inertia": REQUIRED,         # kg m^2, [Jxx, Jyy, Jzz] or 3x3
        "T_p": REQUIRED,             # N of thrust at full throttle
        "thrust_install_deg": 0.0,
        "geometry": {"S": 0.75, "b": 2.1, "c": 0.42},
        "g": 9.81,
        "rho": 1.225,
    },
    "aero": {
        "coefficients": {},          # overrides of the built-in coefficient set
        "estimator_error": {},       # deltas applied only to the estimator's model
    },
    "sensors": {
        "gyro_std_deg": 0.5,         # deg/s
        "attitude_std_deg": 1.0,
        "accel_std": 0.1,            # m/s^2
        "gnss_vel_std": 0.3,         # m/s
        "airspeed_std": 1.0,         # m/s
        "ins_rate": 100.0,           # Hz
        "ads_rate": 100.0,
        "gnss_rate": 10.0,
        "vanes": {"enabled": True, "alpha_std_deg": 1.0, "beta_std_deg": 1.0},
    },
    "wind": {
        "scenario": "steady",
        "params": {},                # keyword overrides for the scenario profile
        "turbulence": {
            "enabled": True,
            "sigma_u": 0.5, "sigma_v": 0.5, "sigma_w": 0.3,   # m/s
            "L_u": 533.4, "L_v": 533.4, "L_w": 533.4,          # m
            "V0": 16.8,                                       # m/s
        },
    },
    "flight": {
        "airspeed": 16.8,            # m/s
        "altitude": 50.0,            # m
        "heading_deg": 0.0,
        "duration": 90.0,            # s
        "dt": 0.01,                  # s
    },
    "ekf": {
        "q_diag": None,              # 12 entries
        "r_diag": None,              # 13 entries
        "p0_diag": None,             # 12 entries
        "airspeed_r_std": 0.3,       # m/s, None to use the sensor std
        "r_floor": 1e-6,
        "joseph": False,
        "fd_rel": 1e-6,
        "fd_floor": 1e-6,
    },
    "amae": {
        "enabled": True,
        "T1": 5.0, "T2": 1.0,        # s
        "d": 0.3,                    # m/s
        "k": None,                   # 1/(m/s); default 2/d
        "a": [0.45, 0.45, 0.10],
        "full_state": False,
    },
    "evaluation": {
        "seed": 0,
        "seeds": 5,
        "warmup": 10.0,              # s
        "n_jobs": 1,
    },
    "sweep": {
        "param": "CL0",              # CL0, CLalpha or CD0
        "grid": None,                # list of deltas including 0; None for the built-in grid
    },
    "replay": {
        "log": None,                 # path of the flight log CSV
        "gnss": "interpolate",       # or "mask"
        "constant_throttle": None,   # used when a log has no delta_p column
    },
    "bench": {
        "duration": 27.0,            # s of simulated data when no log is given
    },
    "output": {
        "dir": None,
    },
}

# sections whose content is a free-form mapping validated elsewhere
_OPEN_SECTIONS = {("aero", "coefficients"), ("aero", "estimator_error"), ("wind", "params")}


def defaults():
    """Deep copy of the default configuration (required keys set to None)."""
    def strip(node):
        if isinstance(node, dict):
            return {k: strip(v) for k, v in node.items()}
        return None if node is REQUIRED else copy.deepcopy(node)
    return strip(SCHEMA)


def _nearest(key, options):
    close = difflib.get_close_matches(key, list(options), n=1, cutoff=0.0)
    return close[0] if close else None


def _merge(schema, user, path=()):
    if not isinstance(user, dict):
        raise SchemaError(f"section '{'.'.join(path) or '<root>'}' must be a mapping",
                          key=".".join(path))
    out = {}
    for key in user:
        if key not in schema:
            near = _nearest(str(key), schema)
            where = ".".join(path + (str(key),))
            hint = f"; did you mean '{near}'?" if near else ""
            raise SchemaError(f"unknown key '{where}'{hint}", key=where)
    for key, default in schema.items():
        sub = path + (key,)
        dotted = ".".join(sub)
        if isinstance(default, dict) and sub not in _OPEN_SECTIONS:
            out[key] = _merge(default, user.get(key, {}) or {}, sub)
            continue
        if key not in user or user[key] is None:
            if default is REQUIRED:
                raise MissingPhysicalConstant(
                    f"required physical constant '{dotted}' is missing", key=key)
            out[key] = copy.deepcopy(default)
            continue
        value = user[key]
        _check_type(value, default, dotted)
        out[key] = value
    return out


def _check_type(value, default, dotted):
    if default is REQUIRED or default is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, _NUMBER):
        ok = isinstance(value, _NUMBER) and not isinstance(value, bool)
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, (list, dict)):
        ok = isinstance(value, type(default))
    else:
        ok = True
    if not ok:
        raise SchemaError(f"'{dotted}' must be {type(default).__name__}, got {type(value).__name__}",
                          key=dotted)


@dataclass
class RunConfig:
    """Validated configuration plus the objects built from it."""

    raw: dict
    params: RigidBodyParams
    truth_aero: AeroCoefficients
    estimator_aero: AeroCoefficients
    sensors: SensorSpec
    scenario: WindScenario
    ekf_options: dict
    amae_options: dict
    use_amae: bool
    smooth_full_state: bool
    source: str | None = None

    @property
    def flight(self):
        return self.raw["flight"]

    @property
    def evaluation(self):
        return self.raw["evaluation"]

    def experiment(self, **overrides):
        """An :class:`~aerowind.evaluation.ExperimentSetup` for this config."""
        from .evaluation import ExperimentSetup

        f = self.flight
        setup = ExperimentSetup(
            params=self.params, scenario=self.scenario, truth_aero=self.truth_aero,
            estimator_aero=self.estimator_aero, sensors=self.sensors,
            ekf_options=dict(self.ekf_options), amae_options=dict(self.amae_options),
            use_amae=self.use_amae, smooth_full_state=self.smooth_full_state,
            duration=f["duration"], dt=f["dt"], airspeed=f["airspeed"], altitude=f["altitude"],
            heading=np.radians(f["heading_deg"]))
        return dataclasses.replace(setup, **overrides)

    def echo(self):
        """YAML text of the effective configuration."""
        return yaml.safe_dump(self.raw, sort_keys=False)

    def write_echo(self, directory, name="config.yaml"):
        path = Path(directory) / name
        path.write_text(self.echo())
        return path


def _build(raw) -> RunConfig:
    v = raw["vehicle"]
    try:
        params = RigidBodyParams(
            inertia=v["inertia"],
            thrust=ThrustModel(float(v["T_p"]), np.radians(v["thrust_install_deg"])),
            mass=float(v["mass"]), geometry=Geometry(**v["geometry"]),
            g=float(v["g"]), rho=float(v["rho"]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"vehicle: {exc}", key="vehicle") from exc

    a = raw["aero"]
    try:
        truth_aero = dataclasses.replace(AeroCoefficients(), **a["coefficients"])
        estimator_aero = apply_perturbation(truth_aero, a["estimator_error"])
    except (TypeError, KeyError, ValueError) as exc:
        bad = next((k for k in list(a["coefficients"]) + list(a["estimator_error"])
                    if k not in AeroCoefficients.names()), None)
        near = _nearest(bad, AeroCoefficients.names()) if bad else None
        hint = f"; did you mean '{near}'?" if near else ""
        raise SchemaError(f"aero: {exc}{hint}", key=bad or "aero") from exc

    s = raw["sensors"]
    vanes = s["vanes"]
    sensors = SensorSpec(
        gyro_std=np.radians(s["gyro_std_deg"]), attitude_std=np.radians(s["attitude_std_deg"]),
        accel_std=s["accel_std"], gnss_vel_std=s["gnss_vel_std"], airspeed_std=s["airspeed_std"],
        ins_rate=s["ins_rate"], ads_rate=s["ads_rate"], gnss_rate=s["gnss_rate"],
        sim_rate=1.0 / raw["flight"]["dt"],
        vane_alpha_std=np.radians(vanes["alpha_std_deg"]) if vanes["enabled"] else None,
        vane_beta_std=np.radians(vanes["beta_std_deg"]) if vanes["enabled"] else None)

    w = raw["wind"]
    if w["scenario"] not in SCENARIOS:
        raise SchemaError(f"wind.scenario must be one of {', '.join(SCENARIOS)}; got "
                          f"'{w['scenario']}'", key="wind.scenario")
    turb = w["turbulence"]
    dryden = None
    if turb["enabled"]:
        dryden = DrydenParams(**{k: float(val) for k, val in turb.items() if k != "enabled"})
    scenario = WindScenario(w["scenario"], dict(w["params"]), dryden)
    try:
        scenario.steady(np.zeros(1))
    except TypeError as exc:
        raise SchemaError(f"wind.params: {exc}", key="wind.params") from exc

    e = dict(raw["ekf"])
    m = raw["amae"]
    amae_options = {k: m[k] for k in ("T1", "T2", "d", "k")}
    amae_options["a"] = tuple(m["a"])
    try:
        from .amae import AmaeConfig

        AmaeConfig(**amae_options)
    except ValueError as exc:
        raise SchemaError(f"amae: {exc}", key="amae") from exc
    if raw["replay"]["gnss"] not in ("interpolate", "mask"):
        raise SchemaError("replay.gnss must be 'interpolate' or 'mask'", key="replay.gnss")
    return RunConfig(raw, params, truth_aero, estimator_aero, sensors, scenario, e, amae_options,
                     bool(m["enabled"]), bool(m["full_state"]))


def parse_config(data=None) -> RunConfig:
    """Validate a config mapping (missing keys take defaults)."""
    raw = _merge(SCHEMA, data or {})
    return _build(raw)


def load_config(path) -> RunConfig:
    """
    Read and validate a YAML config file.

    Raises
    ------
    ParseError
        The file is not valid YAML.
    SchemaError
        Unknown key, wrong type or invalid value.
    MissingPhysicalConstant
        ``vehicle.inertia`` or ``vehicle.T_p`` is absent.
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    cfg = parse_config(data)
    cfg.source = str(path)
    return cfg


def example_config_path():
    return Path(__file__).with_name("data") / "example.yaml"
