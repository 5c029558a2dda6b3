"""Closed-loop truth simulation producing a measurement log."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .aero import AeroCoefficients
from .dynamics import (
    DEFAULT_DT,
    AutopilotGains,
    HoldAutopilot,
    RigidBodyParams,
    Targets,
    TruthState,
    flight_terms,
    trim_level_flight,
)
from .sensors import MeasurementLog, SensorSpec, SensorSuite
from .wind import WindScenario


@dataclass
class SimulationResult:
    t: np.ndarray
    states: np.ndarray       # (N, 12): position, v_body, omega, eta
    controls: np.ndarray     # (N, 3)
    accel: np.ndarray        # (N, 3) true accelerometer quantity
    wind_steady: np.ndarray
    wind_gust: np.ndarray
    wind: np.ndarray
    log: MeasurementLog

    @property
    def v_body(self):
        return self.states[:, 3:6]

    @property
    def omega(self):
        return self.states[:, 6:9]

    @property
    def eta(self):
        return self.states[:, 9:12]


def simulate(scenario: WindScenario, params: RigidBodyParams, aero: AeroCoefficients | None = None,
             sensors: SensorSpec | None = None, duration=90.0, dt=DEFAULT_DT, seed=0,
             airspeed=16.8, altitude=50.0, heading=0.0, gains: AutopilotGains | None = None):
    """
    Fly the hold autopilot through ``scenario`` and record truth and measurements.

    ``seed`` drives both the turbulence and the sensor noise (independent
    streams derived from it).
    """
    aero = aero or AeroCoefficients()
    sensors = sensors or SensorSpec()
    n = int(round(duration / dt)) + 1
    t = np.arange(n) * dt
    ss = np.random.SeedSequence(seed)
    turb_seed, sensor_seed = (int(s.generate_state(1)[0]) for s in ss.spawn(2))
    steady, gust, wind = scenario.generate(t, seed=turb_seed)

    trim_state, trim_u = trim_level_flight(airspeed, params, aero, psi=heading, altitude=altitude)
    ap = HoldAutopilot(trim_state, trim_u, Targets(altitude, airspeed, heading), gains, dt)

    states = np.empty((n, 12))
    controls = np.empty((n, 3))
    accel = np.empty((n, 3))
    s = trim_state.as_array()
    for k in range(n):
        ts = TruthState.from_array(s)
        u = ap.step(ts, wind[k])
        ft = flight_terms(ts.v_body, ts.omega, ts.eta, u, params, aero)
        states[k] = s
        controls[k] = u
        accel[k] = ft.accel
        pos_dot = ft.v_ground_air + wind[k]
        s = s + dt * np.concatenate([pos_dot, ft.v_body_dot, ft.omega_dot, ft.eta_dot])

    suite = SensorSuite(dataclasses.replace(sensors, seed=sensor_seed), params.rho)
    z, flow = suite.measure_batch(t, states[:, 3:6], states[:, 6:9], states[:, 9:12], wind, accel)
    log = MeasurementLog(t, z, controls, flow)
    return SimulationResult(t, states, controls, accel, steady, gust, wind, log)
