"""
Aerodynamic-model-integrated extended Kalman filter for flight state and wind.

State (12)::

    u, v, w, p, q, r, psi, theta, phi, w_x, w_y, w_z

The process model is the rigid-body model of :mod:`aerowind.dynamics` with a
random-walk wind; the observation model is the 13-row layout of
:mod:`aerowind.sensors`. Both Jacobians come from central finite differences
evaluated as one vectorised batch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._kernels import ACCEL, V_COL, VG_AIR
from .aero import AeroCoefficients
from .dynamics import DEFAULT_DT, RigidBodyParams, _evaluate, flight_terms
from .exceptions import AeroWindError, NoAvailableRows, SingularInnovation
from .frames import wrap_angle
from .sensors import ANGLE_ROWS, N_OBS, MeasurementFrame, SensorSpec
from .validation import check_log

logger = logging.getLogger(__name__)

N_STATE = 12
STATE_NAMES = ("u", "v", "w", "p", "q", "r", "psi", "theta", "phi", "wx", "wy", "wz")
WIND = slice(9, 12)

DEFAULT_Q = np.array([1e-4] * 3 + [1e-4] * 3 + [1e-6] * 3 + [1.5e-2, 1.5e-2, 3e-3])
DEFAULT_P0 = np.array([1.0] * 3 + [1e-2] * 3 + [1e-2] * 3 + [25.0] * 3)


class FlightModel:
    """Process and observation functions over stacks of states, shape (..., 12)."""

    def __init__(self, params: RigidBodyParams, aero: AeroCoefficients):
        self.params = params
        self.aero = aero

    def terms(self, x, u):
        return flight_terms(x[..., 0:3], x[..., 3:6], x[..., 6:9], u, self.params, self.aero)

    def _raw(self, x, u):
        x2 = np.atleast_2d(x)
        U = np.empty((x2.shape[0], 3))
        U[:] = np.asarray(u, dtype=float).T if np.ndim(u) == 2 else u
        return x2, _evaluate(np.ascontiguousarray(x2[:, :9]), U, self.params, self.aero)

    def f(self, x, u):
        x = np.asarray(x, dtype=float)
        x2, out = self._raw(x, u)
        fx = np.zeros(x2.shape)
        fx[:, :9] = out[:, :9]
        return fx.reshape(x.shape)

    def h(self, x, u):
        x = np.asarray(x, dtype=float)
        x2, out = self._raw(x, u)
        z = np.empty((x2.shape[0], N_OBS))
        z[:, 0:3] = out[:, VG_AIR:VG_AIR + 3] + x2[:, 9:12]
        z[:, 3:9] = x2[:, 3:9]
        z[:, 9:12] = out[:, ACCEL:ACCEL + 3]
        z[:, 12] = out[:, V_COL]
        return z.reshape(x.shape[:-1] + (N_OBS,))


def fd_steps(x, rel=1e-6, floor=1e-6):
    return np.maximum(floor, rel * np.abs(x))


def _central_batch(fun, x, u, steps):
    """Evaluate ``fun`` at x and at x +/- steps along each axis in one call."""
    n = x.shape[-1]
    E = np.diag(steps)
    X = np.concatenate([x[None, :], x + E, x - E], axis=0)
    Y = fun(X, u)
    J = (Y[1:n + 1] - Y[n + 1:]).T / (2.0 * steps)
    return Y[0], J


def process_model_f(x, u, model: FlightModel):
    return model.f(x, u)


def observation_model_h(x, u, model: FlightModel):
    return model.h(x, u)


def jacobian_f(x, u, model: FlightModel, dt, rel=1e-6, floor=1e-6):
    """
    Jacobian of the discrete map ``x + dt * f(x, u)``.

    Returns
    -------
    F : ndarray, shape (12, 12)
    fx : ndarray, shape (12,)
        ``f(x, u)`` at the nominal point.
    """
    x = np.asarray(x, dtype=float)
    fx, Jf = _central_batch(model.f, x, u, fd_steps(x, rel, floor))
    return np.eye(x.shape[-1]) + dt * Jf, fx


def jacobian_h(x, u, model: FlightModel, rel=1e-6, floor=1e-6):
    """Return ``(H, h(x, u))`` with ``H`` of shape (13, 12)."""
    x = np.asarray(x, dtype=float)
    hx, H = _central_batch(model.h, x, u, fd_steps(x, rel, floor))
    return H, hx


@dataclass
class EkfConfig:
    model: FlightModel
    Q: np.ndarray
    R: np.ndarray
    P0: np.ndarray
    dt: float = DEFAULT_DT
    x0: np.ndarray | None = None
    joseph: bool = False
    fd_rel: float = 1e-6
    fd_floor: float = 1e-6
    angle_rows: tuple = field(default=ANGLE_ROWS)


class EkfState(NamedTuple):
    x: np.ndarray
    P: np.ndarray
    t: float


def _symmetrize(P):
    return 0.5 * (P + P.T)


def predict(ekf: EkfState, u, cfg: EkfConfig) -> EkfState:
    F, fx = jacobian_f(ekf.x, u, cfg.model, cfg.dt, cfg.fd_rel, cfg.fd_floor)
    x = ekf.x + cfg.dt * fx
    P = _symmetrize(F @ ekf.P @ F.T + cfg.Q)
    return EkfState(x, P, ekf.t + cfg.dt)


def update(ekf: EkfState, frame: MeasurementFrame, u, cfg: EkfConfig) -> EkfState:
    """
    Measurement update restricted to the rows available in ``frame``.

    Raises
    ------
    NoAvailableRows
        If the frame carries no usable rows.
    SingularInnovation
        If the innovation covariance is not positive definite.
    """
    z = np.asarray(frame.z, dtype=float)
    mask = np.asarray(frame.mask, dtype=bool) & ~np.isnan(z)
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        raise NoAvailableRows(f"no available rows at t={frame.t}")
    H, hx = jacobian_h(ekf.x, u, cfg.model, cfg.fd_rel, cfg.fd_floor)
    H = H[rows]
    R = cfg.R[np.ix_(rows, rows)]
    innov = z[rows] - hx[rows]
    angle = np.zeros(N_OBS, dtype=bool)
    angle[list(cfg.angle_rows)] = True
    angle = angle[rows]
    if angle.any():
        innov[angle] = wrap_angle(innov[angle])
    PHt = ekf.P @ H.T
    S = H @ PHt + R
    try:
        c = cho_factor(_symmetrize(S))
    except LinAlgError as exc:
        raise SingularInnovation(f"innovation covariance not positive definite at t={frame.t}") from exc
    K = cho_solve(c, PHt.T).T
    x = ekf.x + K @ innov
    IKH = np.eye(len(x)) - K @ H
    if cfg.joseph:
        P = IKH @ ekf.P @ IKH.T + K @ R @ K.T
    else:
        P = IKH @ ekf.P
    return EkfState(x, _symmetrize(P), ekf.t)


def initial_state(frame: MeasurementFrame):
    """
    State from the first frame: body rates and attitude as measured, airspeed
    along the body x axis, zero wind.
    """
    z = np.asarray(frame.z, dtype=float)
    x = np.zeros(N_STATE)
    V = z[12]
    x[0] = V if np.isfinite(V) else 1.0
    x[3:9] = np.where(np.isfinite(z[3:9]), z[3:9], 0.0)
    return x


class FilterHistory(NamedTuple):
    t: np.ndarray
    x: np.ndarray
    P_diag: np.ndarray
    P: np.ndarray | None
    failed: np.ndarray


def run_filter(log, cfg: EkfConfig, store_covariance=False, callback=None) -> FilterHistory:
    """
    Predict at every tick, then update with whatever rows are available.

    ``callback(k, state)`` is called after each tick when given. A failed update
    is logged and skipped; the filter continues on the prediction.
    """
    n = len(log)
    xs = np.empty((n, N_STATE))
    pd = np.empty((n, N_STATE))
    Ps = np.empty((n, N_STATE, N_STATE)) if store_covariance else None
    failed = np.zeros(n, dtype=bool)
    if n == 0:
        return FilterHistory(log.t.copy(), xs, pd, Ps, failed)
    first = log.frame(0)
    x0 = initial_state(first) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
    state = EkfState(x0.copy(), cfg.P0.copy(), float(log.t[0]))
    controls = log.controls
    for k in range(n):
        if k > 0:
            state = predict(state, controls[k - 1], cfg)
            state = EkfState(state.x, state.P, float(log.t[k]))
        frame = log.frame(k)
        try:
            state = update(state, frame, controls[k], cfg)
        except NoAvailableRows:
            pass
        except (SingularInnovation, AeroWindError) as exc:
            failed[k] = True
            logger.warning("update skipped: %s", exc)
        xs[k] = state.x
        pd[k] = np.diag(state.P)
        if Ps is not None:
            Ps[k] = state.P
        if callback is not None:
            callback(k, state)
    return FilterHistory(log.t.copy(), xs, pd, Ps, failed)


# filter-side airspeed noise; tighter than the sensor's 1 m/s (see WindEKF)
DEFAULT_AIRSPEED_R_STD = 0.3


def default_r_diag(spec: SensorSpec | None = None, floor=1e-6, airspeed_std=None):
    """
    Squared sensor stds, floored at ``floor``. ``airspeed_std`` replaces the
    sensor's airspeed std for the airspeed row when given.
    """
    spec = spec or SensorSpec()
    std = spec.observation_std()
    if airspeed_std is not None:
        std[12] = airspeed_std
    return np.maximum(std ** 2, floor)


class WindEKF(TransformerMixin, BaseEstimator):
    """
    Joint flight-state and wind estimator.

    ``fit`` only validates the configuration and builds the noise matrices;
    ``transform`` runs the filter over a measurement log and returns the
    ``(n_samples, 12)`` state history. Derived flow angles and aerodynamic
    coefficients are available from :meth:`derived` afterwards.

    Parameters
    ----------
    params : RigidBodyParams
        Airframe used by the estimator's internal model.
    aero : AeroCoefficients, optional
        Estimator aerodynamic model; defaults to the built-in coefficient set.
    dt : float
        Filter step (s).
    q_diag, p0_diag : array_like of length 12, optional
        Process-noise and initial-covariance diagonals.
    r_diag : array_like of length 13, optional
        Measurement-noise diagonal. Defaults to squared ``sensor_spec`` stds
        with ``r_floor`` as a lower bound.
    airspeed_r_std : float or None
        Std used for the airspeed row of the default ``R``. The default 0.3 m/s
        weights the pitot above its 1 m/s noise level, which keeps the body
        airspeed magnitude anchored when the aerodynamic model is biased and
        keeps lift-model errors out of the horizontal wind. ``None`` uses the
        ``SensorSpec`` value.
    x0 : array_like of length 12, optional
        Initial state; by default taken from the first frame with zero wind.
    joseph : bool
        Use the Joseph-form covariance update.
    """

    def __init__(self, params=None, aero=None, dt=DEFAULT_DT, q_diag=None, r_diag=None,
                 p0_diag=None, x0=None, sensor_spec=None, r_floor=1e-6,
                 airspeed_r_std=DEFAULT_AIRSPEED_R_STD, joseph=False,
                 fd_rel=1e-6, fd_floor=1e-6, store_covariance=False):
        self.params = params
        self.aero = aero
        self.dt = dt
        self.q_diag = q_diag
        self.r_diag = r_diag
        self.p0_diag = p0_diag
        self.x0 = x0
        self.sensor_spec = sensor_spec
        self.r_floor = r_floor
        self.airspeed_r_std = airspeed_r_std
        self.joseph = joseph
        self.fd_rel = fd_rel
        self.fd_floor = fd_floor
        self.store_covariance = store_covariance

    def _diag(self, value, default, n, name):
        d = np.array(default if value is None else value, dtype=float)
        if d.shape != (n,):
            raise ValueError(f"{name} must have length {n}, got shape {d.shape}")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError(f"{name} entries must be finite and non-negative")
        return d

    def fit(self, X=None, y=None):
        if self.params is None:
            raise ValueError("params (RigidBodyParams) is required")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        aero = self.aero if self.aero is not None else AeroCoefficients()
        self.model_ = FlightModel(self.params, aero)
        q = self._diag(self.q_diag, DEFAULT_Q, N_STATE, "q_diag")
        r_default = default_r_diag(self.sensor_spec, self.r_floor, self.airspeed_r_std)
        r = self._diag(self.r_diag, r_default, N_OBS, "r_diag")
        if np.any(r <= 0):
            raise ValueError("r_diag must be strictly positive")
        p0 = self._diag(self.p0_diag, DEFAULT_P0, N_STATE, "p0_diag")
        self.config_ = EkfConfig(self.model_, np.diag(q), np.diag(r), np.diag(p0), self.dt,
                                 None if self.x0 is None else np.asarray(self.x0, dtype=float),
                                 self.joseph, self.fd_rel, self.fd_floor)
        if X is not None:
            check_log(X)
        self.n_features_in_ = N_OBS
        return self

    def filter(self, X) -> FilterHistory:
        check_is_fitted(self, "config_")
        log = check_log(X)
        self.history_ = run_filter(log, self.config_, self.store_covariance)
        self.log_ = log
        return self.history_

    def transform(self, X):
        return self.filter(X).x

    def derived(self, X_states=None, controls=None):
        """
        Airspeed, flow angles and the six aerodynamic coefficients implied by a
        state history.

        Returns
        -------
        dict of ndarray
            Keys ``V``, ``alpha``, ``beta`` and ``CD, CC, CL, Cl, Cm, Cn``.
        """
        check_is_fitted(self, "config_")
        x = self.history_.x if X_states is None else np.asarray(X_states, dtype=float)
        u = self.log_.controls if controls is None else np.asarray(controls, dtype=float)
        ft = self.model_.terms(x, u.T)
        out = {"V": ft.flow.V, "alpha": ft.flow.alpha, "beta": ft.flow.beta}
        for i, name in enumerate(("CD", "CC", "CL", "Cl", "Cm", "Cn")):
            out[name] = ft.coeffs[:, i]
        return out
