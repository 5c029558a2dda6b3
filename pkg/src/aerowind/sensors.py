"""
Simulated INS / GNSS / ADS measurements and the multi-rate measurement log.

Observation layout (13 rows)::

    0-2   V_x, V_y, V_z   GNSS ground velocity, inertial frame (m/s)
    3-5   p, q, r         INS body rates (rad/s)
    6-8   psi, theta, phi INS attitude (rad, wrapped to (-pi, pi])
    9-11  a_x, a_y, a_z   INS acceleration, body frame (m/s^2)
    12    V               ADS airspeed (m/s)

Unavailable rows are NaN.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ClockMisaligned
from .frames import flow_angles, rotation_body_to_inertial, wrap_angle

N_OBS = 13
OBS_NAMES = ("Vx", "Vy", "Vz", "p", "q", "r", "psi", "theta", "phi", "ax", "ay", "az", "V")
GNSS_ROWS = slice(0, 3)
INS_ROWS = slice(3, 12)
ADS_ROWS = slice(12, 13)
ANGLE_ROWS = (6, 7, 8)


@dataclass(frozen=True)
class SensorSpec:
    """Per-channel noise standard deviations (SI units) and sample rates (Hz)."""

    gyro_std: float = np.radians(0.5)
    attitude_std: float = np.radians(1.0)
    accel_std: float = 0.1
    gnss_vel_std: float = 0.3
    airspeed_std: float = 1.0
    ins_rate: float = 100.0
    ads_rate: float = 100.0
    gnss_rate: float = 10.0
    sim_rate: float = 100.0
    vane_alpha_std: float | None = None
    vane_beta_std: float | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("gyro_std", "attitude_std", "accel_std", "gnss_vel_std", "airspeed_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("ins_rate", "ads_rate", "gnss_rate"):
            ratio = self.sim_rate / getattr(self, name)
            if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
                raise ValueError(f"{name} must divide the simulation rate {self.sim_rate}")

    @property
    def vanes_enabled(self):
        return self.vane_alpha_std is not None and self.vane_beta_std is not None

    def observation_std(self):
        """Noise std for each of the 13 observation rows."""
        return np.array([self.gnss_vel_std] * 3 + [self.gyro_std] * 3
                        + [self.attitude_std] * 3 + [self.accel_std] * 3 + [self.airspeed_std])

    def decimation(self):
        return tuple(int(round(self.sim_rate / r)) for r in (self.gnss_rate, self.ins_rate, self.ads_rate))

    def noise_free(self):
        return dataclasses.replace(self, gyro_std=0.0, attitude_std=0.0, accel_std=0.0,
                                   gnss_vel_std=0.0, airspeed_std=0.0,
                                   vane_alpha_std=0.0 if self.vanes_enabled else None,
                                   vane_beta_std=0.0 if self.vanes_enabled else None)


def enable_flow_vanes(spec: SensorSpec, alpha_std=np.radians(1.0), beta_std=np.radians(1.0)):
    """Add angle-of-attack / sideslip vane channels (used only by the direct baseline)."""
    return dataclasses.replace(spec, vane_alpha_std=alpha_std, vane_beta_std=beta_std)


class MeasurementFrame(NamedTuple):
    t: float
    z: np.ndarray
    mask: np.ndarray
    flow: np.ndarray | None = None


@dataclass
class MeasurementLog:
    """
    Time-aligned measurement stream plus the controls applied at each tick.

    ``flow`` holds vane ``(alpha_m, beta_m)`` or NaN when absent.
    """

    t: np.ndarray
    z: np.ndarray
    controls: np.ndarray
    flow: np.ndarray | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.z = np.asarray(self.z, dtype=float).reshape(-1, N_OBS)
        self.controls = np.asarray(self.controls, dtype=float).reshape(-1, 3)
        if self.flow is not None:
            self.flow = np.asarray(self.flow, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.t)

    @property
    def mask(self):
        return ~np.isnan(self.z)

    @property
    def has_flow(self):
        return self.flow is not None and not np.all(np.isnan(self.flow))

    def frame(self, k):
        flow = None if self.flow is None else self.flow[k]
        z = self.z[k]
        return MeasurementFrame(float(self.t[k]), z, ~np.isnan(z), flow)

    def __getitem__(self, key):
        if isinstance(key, int):
            return self.frame(key)
        return MeasurementLog(self.t[key], self.z[key], self.controls[key],
                              None if self.flow is None else self.flow[key])


def true_observation(v_body, omega, eta, wind, accel):
    """Noise-free 13-row observation for one state or a stack of states."""
    v_body = np.asarray(v_body, dtype=float)
    r_gb = rotation_body_to_inertial(eta)
    vg = np.einsum("...ij,...j->...i", r_gb, v_body) + np.asarray(wind, dtype=float)
    V = np.linalg.norm(v_body, axis=-1)[..., None]
    return np.concatenate([vg, np.asarray(omega, dtype=float), wrap_angle(eta),
                           np.asarray(accel, dtype=float), V], axis=-1)


class SensorSuite:
    """Seeded measurement generator; one instance per simulation run."""

    def __init__(self, spec: SensorSpec | None = None, rho=1.225):
        self.spec = spec or SensorSpec()
        self.rho = rho
        self.rng = np.random.default_rng(self.spec.seed)

    def _tick(self, t):
        k = t * self.spec.sim_rate
        tick = np.rint(k)
        if np.any(np.abs(k - tick) > 1e-6):
            raise ClockMisaligned(f"t={t} not on the {self.spec.sim_rate:g} Hz grid")
        return tick.astype(np.int64)

    def availability(self, t):
        """Boolean mask of shape (..., 13) for the given tick times."""
        tick = self._tick(np.asarray(t, dtype=float))
        n_gnss, n_ins, n_ads = self.spec.decimation()
        mask = np.empty(np.shape(tick) + (N_OBS,), dtype=bool)
        mask[..., GNSS_ROWS] = (tick % n_gnss == 0)[..., None]
        mask[..., INS_ROWS] = (tick % n_ins == 0)[..., None]
        mask[..., ADS_ROWS] = (tick % n_ads == 0)[..., None]
        return mask

    def measure_batch(self, t, v_body, omega, eta, wind, accel):
        """
        Vectorised measurement of a whole trajectory.

        Returns
        -------
        z : ndarray, shape (N, 13)
        flow : ndarray, shape (N, 2) or None
        """
        t = np.asarray(t, dtype=float)
        truth = true_observation(v_body, omega, eta, wind, accel)
        std = self.spec.observation_std()
        z = truth + self.rng.standard_normal(truth.shape) * std
        z[..., 6:9] = wrap_angle(z[..., 6:9])
        z[~self.availability(t)] = np.nan
        flow = None
        if self.spec.vanes_enabled:
            fs = flow_angles(v_body, self.rho)
            noise = self.rng.standard_normal(truth.shape[:-1] + (2,))
            flow = np.stack([fs.alpha, fs.beta], axis=-1) + noise * np.array(
                [self.spec.vane_alpha_std, self.spec.vane_beta_std])
            ads_off = ~self.availability(t)[..., 12]
            flow[ads_off] = np.nan
        return z, flow

    def measure(self, truth, wind, accel_true, t) -> MeasurementFrame:
        """Single-tick measurement of a :class:`~aerowind.dynamics.TruthState`."""
        z, flow = self.measure_batch(np.array([t]), truth.v_body[None], truth.omega[None],
                                     truth.eta[None], np.asarray(wind)[None],
                                     np.asarray(accel_true)[None])
        return MeasurementFrame(float(t), z[0], ~np.isnan(z[0]), None if flow is None else flow[0])


def measure(truth, wind, accel_true, spec: SensorSpec, t, rng=None) -> MeasurementFrame:
    suite = SensorSuite(spec)
    if rng is not None:
        suite.rng = rng
    return suite.measure(truth, wind, accel_true, t)
