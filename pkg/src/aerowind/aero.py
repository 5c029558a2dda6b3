"""
Linear stability-derivative aerodynamic model, thrust and elevon mixing.

Rate derivatives are non-dimensionalised with ``b / (RATE_NORM * V)`` for
``p, r`` and ``c / (RATE_NORM * V)`` for ``q``.
"""

from __future__ import annotations

import dataclasses
import functools
from collections.abc import Mapping
from dataclasses import dataclass, field, fields

import numpy as np

from .exceptions import DegenerateAirspeed, ThrottleOutOfRange
from .frames import AIRSPEED_EPS

RATE_NORM = 2.0


@dataclass(frozen=True)
class AeroCoefficients:
    """
    Dimensionless stability derivatives; angle and rate derivatives are per rad.

    Defaults are the Skywalker X8 set. Entries without a published value
    (the rate derivatives) are zero.
    """

    CL0: float = 0.0867
    CLalpha: float = 4.02
    CLq: float = 0.0
    CLde: float = 0.278
    CD0: float = 0.0197
    CDalpha: float = 0.0791
    CDde: float = 0.0633
    CDalpha2: float = 0.0
    CC0: float = 0.00316
    CCbeta: float = -0.224
    CCp: float = 0.0
    CCr: float = 0.0
    CCda: float = 0.0433
    Cl0: float = 0.00413
    Clbeta: float = -0.0849
    Clp: float = 0.0
    Clr: float = 0.0
    Clda: float = 0.12
    Cm0: float = 0.0302
    Cmalpha: float = -0.126
    Cmq: float = 0.0
    Cmde: float = -0.206
    Cn0: float = -0.000471
    Cnbeta: float = 0.0283
    Cnp: float = 0.0
    Cnr: float = 0.0
    Cnda: float = -0.00339

    def __post_init__(self):
        if not self.CLalpha > 0:
            raise ValueError(f"CLalpha must be positive, got {self.CLalpha}")

    @functools.cached_property
    def packed(self):
        """Coefficients as a read-only vector in field order."""
        a = np.array([getattr(self, f.name) for f in fields(self)], dtype=float)
        a.setflags(write=False)
        return a

    @classmethod
    def names(cls):
        return tuple(f.name for f in fields(cls))

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Geometry:
    S: float = 0.75
    b: float = 2.10
    c: float = 0.42

    def __post_init__(self):
        for name in ("S", "b", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"geometry {name} must be positive")


@dataclass(frozen=True)
class ThrustModel:
    """Thrust proportional to throttle, ``T = T_p * delta_p``."""

    T_p: float
    install_angle: float = 0.0

    def __post_init__(self):
        if self.T_p < 0:
            raise ValueError("T_p must be non-negative")


@dataclass(frozen=True)
class ModelPerturbation:
    """Additive deltas on any subset of :class:`AeroCoefficients` entries."""

    deltas: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.deltas) - set(AeroCoefficients.names())
        if unknown:
            raise KeyError(f"unknown coefficient(s): {sorted(unknown)}")

    def __neg__(self):
        return ModelPerturbation({k: -v for k, v in self.deltas.items()})


def apply_perturbation(model: AeroCoefficients, delta: ModelPerturbation) -> AeroCoefficients:
    if isinstance(delta, Mapping):
        delta = ModelPerturbation(delta)
    changes = {k: getattr(model, k) + v for k, v in delta.deltas.items()}
    return dataclasses.replace(model, **changes)


def elevon_mix(delta_left, delta_right):
    """Equivalent ``(delta_a, delta_e)`` from left/right elevon deflections."""
    return (delta_right - delta_left) / 2.0, (delta_right + delta_left) / 2.0


def elevon_unmix(delta_a, delta_e):
    """Left/right elevon deflections from ``(delta_a, delta_e)``."""
    return delta_e - delta_a, delta_e + delta_a


def coefficients(flow, omega, delta_a, delta_e, model: AeroCoefficients, geom: Geometry,
                 eps=AIRSPEED_EPS):
    """
    Evaluate ``(C_D, C_C, C_L, C_l, C_m, C_n)``.

    Parameters
    ----------
    flow : FlowState
        Only ``V``, ``alpha`` and ``beta`` are used; fields may be arrays.
    omega : array_like, shape (..., 3)
        Body rates ``(p, q, r)`` in rad/s.
    delta_a, delta_e : float or ndarray
        Equivalent aileron and elevator deflections (rad).

    Returns
    -------
    ndarray, shape (..., 6)
    """
    V = np.asarray(flow.V, dtype=float)
    alpha, beta = flow.alpha, flow.beta
    if np.any(V <= eps):
        raise DegenerateAirspeed(f"airspeed {np.min(V):.4g} m/s <= {eps} m/s")
    omega = np.asarray(omega, dtype=float)
    p, q, r = omega[..., 0], omega[..., 1], omega[..., 2]
    m = model
    ph = p * geom.b / (RATE_NORM * V)
    qh = q * geom.c / (RATE_NORM * V)
    rh = r * geom.b / (RATE_NORM * V)
    CL = m.CL0 + m.CLalpha * alpha + m.CLq * qh + m.CLde * delta_e
    CD = m.CD0 + m.CDalpha * alpha + m.CDalpha2 * alpha * alpha + m.CDde * delta_e
    CC = m.CC0 + m.CCbeta * beta + m.CCp * ph + m.CCr * rh + m.CCda * delta_a
    Cl = m.Cl0 + m.Clbeta * beta + m.Clp * ph + m.Clr * rh + m.Clda * delta_a
    Cm = m.Cm0 + m.Cmalpha * alpha + m.Cmq * qh + m.Cmde * delta_e
    Cn = m.Cn0 + m.Cnbeta * beta + m.Cnp * ph + m.Cnr * rh + m.Cnda * delta_a
    return np.stack(np.broadcast_arrays(CD, CC, CL, Cl, Cm, Cn), axis=-1)


def forces_moments(coeffs, qbar, geom: Geometry):
    """
    Wind-axis force ``[D, C, L]`` (N) and body moment ``[l, M, N]`` (N m).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    qs = np.asarray(qbar, dtype=float)[..., None] * geom.S
    force = qs * coeffs[..., 0:3]
    moment = qs * coeffs[..., 3:6] * np.array([geom.b, geom.c, geom.b])
    return force, moment


def thrust(delta_p, model: ThrustModel):
    """Return ``(T, body_vector)`` for throttle fraction ``delta_p``."""
    dp = np.asarray(delta_p, dtype=float)
    if np.any((dp < 0.0) | (dp > 1.0)):
        raise ThrottleOutOfRange(f"throttle {dp} outside [0, 1]")
    T = model.T_p * dp
    ca, sa = np.cos(model.install_angle), np.sin(model.install_angle)
    vec = np.stack(np.broadcast_arrays(T * ca, np.zeros_like(T), -T * sa), axis=-1)
    return T, vec
