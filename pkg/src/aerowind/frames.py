"""
Coordinate frames and flow-angle conversions.

Conventions
-----------
* Inertial frame: flat Earth, x north, y east, z down.
* Body frame: x forward, y right wing, z down.
* Euler angles are stored in the order ``(psi, theta, phi)`` (yaw, pitch,
  roll) and compose as a ZYX sequence, ``R_gb = Rz(psi) @ Ry(theta) @ Rx(phi)``.
* Wind-frame aerodynamic force is ``[D, C, L]``: drag positive aft, side force
  positive towards the right wing, lift positive up.  :func:`rotation_wind_to_body`
  folds the sign flips in, so ``R_ba @ [D, C, L]`` is the body-axis force.

Every function accepts a single vector or a stack of vectors along the leading
axes; matrices are returned with shape ``(..., 3, 3)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateAirspeed, GimbalLock

GIMBAL_EPS = 1e-3
AIRSPEED_EPS = 0.1

# wind-axis [D, C, L] -> wind-axis vector with x along the airspeed
_FORCE_SIGNS = np.array([-1.0, 1.0, -1.0])


class FlowState(NamedTuple):
    V: float
    alpha: float
    beta: float
    qbar: float
    rho: float


def wrap_angle(angle):
    """Wrap radians to (-pi, pi]."""
    a = np.mod(np.asarray(angle, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(a == -np.pi, np.pi, a)


def wrap_degrees(angle):
    """Wrap degrees to (-180, 180]."""
    a = np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0
    return np.where(a == -180.0, 180.0, a)


def _stack3x3(r00, r01, r02, r10, r11, r12, r20, r21, r22):
    rows = [np.stack(np.broadcast_arrays(r00, r01, r02), axis=-1),
            np.stack(np.broadcast_arrays(r10, r11, r12), axis=-1),
            np.stack(np.broadcast_arrays(r20, r21, r22), axis=-1)]
    return np.stack(rows, axis=-2)


def rotation_body_to_inertial(eta):
    """
    Body-to-inertial rotation matrix ``R_gb`` for ZYX Euler angles.

    Parameters
    ----------
    eta : array_like, shape (..., 3)
        ``(psi, theta, phi)`` in radians.

    Returns
    -------
    ndarray, shape (..., 3, 3)
        Proper orthogonal matrix. Its transpose is the inertial-to-body matrix.
    """
    eta = np.asarray(eta, dtype=float)
    psi, theta, phi = eta[..., 0], eta[..., 1], eta[..., 2]
    cps, sps = np.cos(psi), np.sin(psi)
    cth, sth = np.cos(theta), np.sin(theta)
    cph, sph = np.cos(phi), np.sin(phi)
    return _stack3x3(
        cth * cps, sph * sth * cps - cph * sps, cph * sth * cps + sph * sps,
        cth * sps, sph * sth * sps + cph * cps, cph * sth * sps - sph * cps,
        -sth, sph * cth, cph * cth,
    )


def rotation_inertial_to_body(eta):
    return np.swapaxes(rotation_body_to_inertial(eta), -1, -2)


def rotation_wind_to_body(alpha, beta):
    """
    Matrix ``R_ba`` mapping the wind-axis force ``[D, C, L]`` to body axes.

    At zero flow angles drag maps to ``-x_body`` and lift to ``-z_body``.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    r_bw = _stack3x3(
        ca * cb, -ca * sb, -sa,
        sb, cb, np.zeros_like(ca * cb),
        sa * cb, -sa * sb, ca,
    )
    return r_bw * _FORCE_SIGNS


def euler_rate_matrix(eta, eps=GIMBAL_EPS):
    """
    Matrix ``T(eta)`` with ``d(psi, theta, phi)/dt = T(eta) @ (p, q, r)``.

    Raises
    ------
    GimbalLock
        If ``|theta| >= pi/2 - eps`` anywhere in the input.
    """
    eta = np.asarray(eta, dtype=float)
    theta, phi = eta[..., 1], eta[..., 2]
    if np.any(np.abs(theta) >= np.pi / 2 - eps):
        raise GimbalLock(f"pitch {np.max(np.abs(theta)):.6f} rad inside gimbal guard")
    cth, tth = np.cos(theta), np.tan(theta)
    cph, sph = np.cos(phi), np.sin(phi)
    zero = np.zeros_like(theta)
    return _stack3x3(
        zero, sph / cth, cph / cth,
        zero, cph, -sph,
        np.ones_like(theta), sph * tth, cph * tth,
    )


def airspeed(v_body):
    return np.linalg.norm(np.asarray(v_body, dtype=float), axis=-1)


def flow_angles(v_body, rho=1.225, eps=AIRSPEED_EPS):
    """
    Airspeed, angle of attack, sideslip and dynamic pressure from body airspeed.

    Parameters
    ----------
    v_body : array_like, shape (..., 3)
        ``(u, v, w)`` in m/s.
    rho : float
        Air density in kg/m^3.

    Returns
    -------
    FlowState
        Fields are scalars or arrays matching the leading shape of ``v_body``.
    """
    v_body = np.asarray(v_body, dtype=float)
    u, v, w = v_body[..., 0], v_body[..., 1], v_body[..., 2]
    V = np.sqrt(u * u + v * v + w * w)
    if np.any(V <= eps):
        raise DegenerateAirspeed(f"airspeed {np.min(V):.4g} m/s <= {eps} m/s")
    alpha = np.arctan2(w, u)
    beta = np.arcsin(np.clip(v / V, -1.0, 1.0))
    qbar = 0.5 * rho * V * V
    return FlowState(V, alpha, beta, qbar, rho)


def body_velocity_from_flow(V, alpha, beta):
    """Inverse of :func:`flow_angles`: ``(u, v, w)`` from ``(V, alpha, beta)``."""
    V, alpha, beta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (V, alpha, beta)))
    cb = np.cos(beta)
    return np.stack([V * np.cos(alpha) * cb, V * np.sin(beta), V * np.sin(alpha) * cb], axis=-1)
