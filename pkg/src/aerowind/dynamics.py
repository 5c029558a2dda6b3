"""
Six-degree-of-freedom rigid-body model, forward-Euler integrator, level-flight
trim solver and a three-loop hold autopilot.

Wind is quasi-static: it shifts the ground velocity (position kinematics) and
never appears as a force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .aero import RATE_NORM, AeroCoefficients, Geometry, ThrustModel
from .exceptions import DegenerateAirspeed, GimbalLock, ThrottleOutOfRange, TrimNotFound
from .frames import AIRSPEED_EPS, GIMBAL_EPS, FlowState, wrap_angle

DEFAULT_DT = 0.01


@dataclass(frozen=True)
class RigidBodyParams:
    """
    Mass properties and environment.

    ``inertia`` and ``thrust`` have no defaults: they are physical constants of
    the airframe and must be supplied.
    """

    inertia: np.ndarray
    thrust: ThrustModel
    mass: float = 4.0
    geometry: Geometry = field(default_factory=Geometry)
    g: float = 9.81
    rho: float = 1.225
    gimbal_eps: float = GIMBAL_EPS

    def __post_init__(self):
        J = np.array(self.inertia, dtype=float)
        if J.shape == (3,):
            J = np.diag(J)
        if J.shape != (3, 3):
            raise ValueError("inertia must be a 3-vector (diagonal) or 3x3 matrix")
        if not np.allclose(J, J.T):
            raise ValueError("inertia matrix must be symmetric")
        if np.any(np.linalg.eigvalsh(J) <= 0):
            raise ValueError("inertia matrix must be positive definite")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        J.setflags(write=False)
        object.__setattr__(self, "inertia", J)
        inv = np.linalg.inv(J)
        inv.setflags(write=False)
        object.__setattr__(self, "_inertia_inv", inv)

    @property
    def inertia_inv(self):
        return self._inertia_inv

    @property
    def geometry_array(self):
        return np.array([self.geometry.S, self.geometry.b, self.geometry.c])


class ControlVector(NamedTuple):
    delta_a: float
    delta_e: float
    delta_p: float


class TruthState(NamedTuple):
    """Full simulator state; ``as_array`` gives the 12-element layout."""

    position: np.ndarray
    v_body: np.ndarray
    omega: np.ndarray
    eta: np.ndarray

    def as_array(self):
        return np.concatenate([self.position, self.v_body, self.omega, self.eta])

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a[0:3].copy(), a[3:6].copy(), a[6:9].copy(), a[9:12].copy())

    @property
    def altitude(self):
        return -self.position[2]


class FlightTerms(NamedTuple):
    v_body_dot: np.ndarray
    omega_dot: np.ndarray
    eta_dot: np.ndarray
    accel: np.ndarray
    v_ground_air: np.ndarray
    flow: FlowState
    coeffs: np.ndarray


_STATUS_ERRORS = {
    _kernels.DEGENERATE_AIRSPEED: (DegenerateAirspeed, "airspeed below {eps_v} m/s"),
    _kernels.GIMBAL_LOCK: (GimbalLock, "pitch inside the gimbal guard"),
    _kernels.BAD_THROTTLE: (ThrottleOutOfRange, "throttle outside [0, 1]"),
}


def flight_terms(v_body, omega, eta, controls, params: RigidBodyParams,
                 aero: AeroCoefficients) -> FlightTerms:
    """
    Evaluate the rigid-body equations for one state or a stack of states.

    ``accel`` is the body-axis acceleration sensed by the simulated
    accelerometer, ``(thrust + R_ba F_aero) / m + R_bg [0, 0, g]``, and
    ``v_ground_air`` is ``R_gb V_b``.

    Raises
    ------
    DegenerateAirspeed, GimbalLock, ThrottleOutOfRange
    """
    v_body = np.asarray(v_body, dtype=float)
    single = v_body.ndim == 1
    X = np.concatenate(np.broadcast_arrays(np.atleast_2d(v_body), np.atleast_2d(omega),
                                           np.atleast_2d(eta)), axis=-1)
    n = X.shape[0]
    U = np.empty((n, 3))
    for i, c in enumerate(controls):
        U[:, i] = c
    out = _evaluate(X, U, params, aero)
    if single:
        out = out[0]
    V = out[..., _kernels.V_COL]
    flow = FlowState(V, out[..., _kernels.ALPHA_COL], out[..., _kernels.BETA_COL],
                     0.5 * params.rho * V * V, params.rho)
    return FlightTerms(out[..., 0:3], out[..., 3:6], out[..., 6:9], out[..., 9:12],
                       out[..., 12:15], flow, out[..., 18:24])


def _evaluate(X, U, params: RigidBodyParams, aero: AeroCoefficients):
    """Kernel call on contiguous ``(N, 9)`` states and ``(N, 3)`` controls."""
    out = np.empty((X.shape[0], _kernels.N_OUT))
    status = _kernels.flight_batch(
        X, U, aero.packed, params.geometry_array, params.mass, params.inertia,
        params.inertia_inv, params.g, params.rho, params.thrust.T_p, params.thrust.install_angle,
        RATE_NORM, AIRSPEED_EPS, params.gimbal_eps, out)
    if status != _kernels.OK:
        exc, msg = _STATUS_ERRORS[status]
        raise exc(msg.format(eps_v=AIRSPEED_EPS))
    return out


def state_derivative(s: TruthState, u, wind, params: RigidBodyParams,
                     aero: AeroCoefficients) -> TruthState:
    """Time derivative of the truth state (returned in the same layout)."""
    ft = flight_terms(s.v_body, s.omega, s.eta, u, params, aero)
    pos_dot = ft.v_ground_air + np.asarray(wind, dtype=float)
    return TruthState(pos_dot, ft.v_body_dot, ft.omega_dot, ft.eta_dot)


def euler_step(s: TruthState, u, wind, dt, params: RigidBodyParams,
               aero: AeroCoefficients) -> TruthState:
    if dt == 0:
        return s
    d = state_derivative(s, u, wind, params, aero)
    return TruthState(*(a + dt * b for a, b in zip(s, d)))


# -- trim -------------------------------------------------------------------

def _trim_residual(z, V, params, aero, psi):
    alpha, beta, theta, phi, da, de, dp = z
    vb = np.array([V * np.cos(alpha) * np.cos(beta), V * np.sin(beta),
                   V * np.sin(alpha) * np.cos(beta)])
    eta = np.array([psi, theta, phi])
    ft = flight_terms(vb, np.zeros(3), eta, ControlVector(da, de, dp), params, aero)
    climb = ft.v_ground_air[2]
    return np.concatenate([params.mass * ft.v_body_dot,
                           params.inertia @ ft.omega_dot, [climb]])


def trim_level_flight(V_target, params: RigidBodyParams, aero: AeroCoefficients,
                      psi=0.0, altitude=50.0, tol=1e-8, max_iter=50):
    """
    Steady wings-level flight at constant altitude and airspeed.

    Solves for ``(alpha, beta, theta, phi, delta_a, delta_e, delta_p)`` with a
    damped Newton iteration on the force, moment and climb-rate residual.

    Returns
    -------
    state : TruthState
    controls : ControlVector

    Raises
    ------
    TrimNotFound
        When the residual norm stays above ``tol`` after ``max_iter`` steps or the
        throttle leaves [0, 1].
    """
    z = np.array([0.05, 0.0, 0.05, 0.0, 0.0, 0.0, 0.3])

    def resid(zz):
        zz = zz.copy()
        zz[6] = np.clip(zz[6], 0.0, 1.0)
        return _trim_residual(zz, V_target, params, aero, psi)

    r = resid(z)
    for _ in range(max_iter):
        norm = np.linalg.norm(r)
        if norm < tol:
            break
        jac = np.empty((7, 7))
        for i in range(7):
            h = 1e-7
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            jac[:, i] = (resid(zp) - resid(zm)) / (2 * h)
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            z_new = z + lam * step
            r_new = resid(z_new)
            if np.linalg.norm(r_new) < norm:
                break
            lam *= 0.5
        z, r = z_new, r_new
    norm = np.linalg.norm(r)
    if norm >= tol or not 0.0 <= z[6] <= 1.0:
        raise TrimNotFound(f"trim residual {norm:.3e} (throttle {z[6]:.3f})", residual=norm)
    alpha, beta, theta, phi, da, de, dp = z
    vb = np.array([V_target * np.cos(alpha) * np.cos(beta), V_target * np.sin(beta),
                   V_target * np.sin(alpha) * np.cos(beta)])
    state = TruthState(np.array([0.0, 0.0, -altitude]), vb, np.zeros(3),
                       np.array([psi, theta, phi]))
    return state, ControlVector(da, de, dp)


# -- autopilot --------------------------------------------------------------

@dataclass
class AutopilotGains:
    k_h: float = 0.03          # rad / m
    k_hi: float = 0.004        # rad / (m s)
    k_hdot: float = 0.03       # rad / (m/s)
    theta_limit: float = np.radians(15.0)
    k_theta: float = 1.5
    k_q: float = 0.15
    k_v: float = 0.08
    k_vi: float = 0.02
    k_psi: float = 0.8
    phi_limit: float = np.radians(20.0)
    k_phi: float = 0.8
    k_p: float = 0.12
    surface_limit: float = np.radians(30.0)


@dataclass
class Targets:
    altitude: float = 50.0
    airspeed: float = 16.8
    heading: float = 0.0


def _clip(x, lim):
    return min(max(x, -lim), lim)


class HoldAutopilot:
    """
    Altitude, airspeed and heading hold around a trim point.

    Pitch and roll inner loops carry rate feedback because the default airframe
    model has no aerodynamic rate damping.
    """

    def __init__(self, trim_state: TruthState, trim_controls: ControlVector,
                 targets: Targets | None = None, gains: AutopilotGains | None = None,
                 dt=DEFAULT_DT):
        self.trim_state = trim_state
        self.trim_controls = ControlVector(*trim_controls)
        self.targets = targets or Targets(altitude=trim_state.altitude,
                                          airspeed=float(np.linalg.norm(trim_state.v_body)),
                                          heading=float(trim_state.eta[0]))
        self.gains = gains or AutopilotGains()
        self.dt = dt
        self._int_h = 0.0
        self._int_v = 0.0

    def reset(self):
        self._int_h = 0.0
        self._int_v = 0.0

    def step(self, s: TruthState, wind=(0.0, 0.0, 0.0)) -> ControlVector:
        g, tg, trim = self.gains, self.targets, self.trim_controls
        u, v, w = s.v_body
        _, theta, phi = s.eta
        cth = math.cos(theta)
        climb_rate = (math.sin(theta) * u - math.sin(phi) * cth * v
                      - math.cos(phi) * cth * w - float(wind[2]))
        err_h = tg.altitude - s.altitude
        V = math.sqrt(u * u + v * v + w * w)
        err_v = tg.airspeed - V

        theta_cmd = self.trim_state.eta[1] + g.k_h * err_h + g.k_hi * self._int_h - g.k_hdot * climb_rate
        theta_cmd = _clip(theta_cmd, g.theta_limit)
        de = trim.delta_e - g.k_theta * (theta_cmd - s.eta[1]) + g.k_q * s.omega[1]

        dp = trim.delta_p + g.k_v * err_v + g.k_vi * self._int_v

        phi_cmd = self.trim_state.eta[2] + g.k_psi * float(wrap_angle(tg.heading - s.eta[0]))
        phi_cmd = _clip(phi_cmd, g.phi_limit)
        da = trim.delta_a + g.k_phi * (phi_cmd - s.eta[2]) - g.k_p * s.omega[0]

        lim = g.surface_limit
        out = ControlVector(_clip(float(da), lim), _clip(float(de), lim),
                            min(max(float(dp), 0.0), 1.0))
        # conditional integration: freeze while saturated
        if abs(out.delta_e) < lim:
            self._int_h += err_h * self.dt
        if 0.0 < out.delta_p < 1.0:
            self._int_v += err_v * self.dt
        return out


def autopilot_step(s: TruthState, targets: Targets, gains: AutopilotGains,
                   trim_state: TruthState, trim_controls: ControlVector) -> ControlVector:
    """Single stateless evaluation of the hold laws (integrators at zero)."""
    return HoldAutopilot(trim_state, trim_controls, targets, gains).step(s)
