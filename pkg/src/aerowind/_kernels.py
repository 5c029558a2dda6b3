"""
Compiled rigid-body kernel.

One loop over a stack of states evaluates aerodynamics, thrust, gravity and
the rigid-body equations. Every model path (truth simulator, EKF process
model, EKF observation model) goes through :func:`flight_batch`, so the
estimator and the simulator share arithmetic exactly.
"""

import numpy as np
from numba import njit

# output column layout
VB_DOT, OMEGA_DOT, ETA_DOT, ACCEL, VG_AIR = 0, 3, 6, 9, 12
V_COL, ALPHA_COL, BETA_COL, COEF = 15, 16, 17, 18
N_OUT = 24

OK, DEGENERATE_AIRSPEED, GIMBAL_LOCK, BAD_THROTTLE = 0, 1, 2, 3


@njit(cache=True)
def flight_batch(X, U, coef, geom, mass, J, Jinv, g, rho, T_p, install, rate_norm,
                 v_eps, gimbal_eps, out):
    """
    Parameters
    ----------
    X : (N, 9) body airspeed, body rates, Euler angles (psi, theta, phi)
    U : (N, 3) delta_a, delta_e, delta_p
    coef : (27,) coefficients in ``AeroCoefficients`` field order
    geom : (3,) S, b, c
    out : (N, 24) output buffer, see module-level column constants

    Returns a status code; ``out`` is only complete when it is ``OK``.
    """
    S, b, c = geom[0], geom[1], geom[2]
    half_pi = 0.5 * np.pi
    ci, si = np.cos(install), np.sin(install)
    for k in range(X.shape[0]):
        u, v, w = X[k, 0], X[k, 1], X[k, 2]
        p, q, r = X[k, 3], X[k, 4], X[k, 5]
        psi, theta, phi = X[k, 6], X[k, 7], X[k, 8]
        da, de, dp = U[k, 0], U[k, 1], U[k, 2]
        V = np.sqrt(u * u + v * v + w * w)
        if not V > v_eps:
            return DEGENERATE_AIRSPEED
        if not abs(theta) < half_pi - gimbal_eps:
            return GIMBAL_LOCK
        if not (0.0 <= dp <= 1.0):
            return BAD_THROTTLE
        alpha = np.arctan2(w, u)
        sb_ = v / V
        if sb_ > 1.0:
            sb_ = 1.0
        elif sb_ < -1.0:
            sb_ = -1.0
        beta = np.arcsin(sb_)
        qbar = 0.5 * rho * V * V

        ph = p * b / (rate_norm * V)
        qh = q * c / (rate_norm * V)
        rh = r * b / (rate_norm * V)
        CL = coef[0] + coef[1] * alpha + coef[2] * qh + coef[3] * de
        CD = coef[4] + coef[5] * alpha + coef[6] * de + coef[7] * alpha * alpha
        CC = coef[8] + coef[9] * beta + coef[10] * ph + coef[11] * rh + coef[12] * da
        Cl = coef[13] + coef[14] * beta + coef[15] * ph + coef[16] * rh + coef[17] * da
        Cm = coef[18] + coef[19] * alpha + coef[20] * qh + coef[21] * de
        Cn = coef[22] + coef[23] * beta + coef[24] * ph + coef[25] * rh + coef[26] * da

        qs = qbar * S
        D, C, L = qs * CD, qs * CC, qs * CL
        Ml, Mm, Mn = qs * b * Cl, qs * c * Cm, qs * b * Cn

        # R_ba [D, C, L] with drag aft and lift up
        ca, sa = np.cos(alpha), np.sin(alpha)
        cb, sb = np.cos(beta), np.sin(beta)
        fx = -ca * cb * D - ca * sb * C + sa * L
        fy = -sb * D + cb * C
        fz = -sa * cb * D - sa * sb * C - ca * L

        T = T_p * dp
        cps, sps = np.cos(psi), np.sin(psi)
        cth, sth = np.cos(theta), np.sin(theta)
        cph, sph = np.cos(phi), np.sin(phi)
        r00 = cth * cps
        r01 = sph * sth * cps - cph * sps
        r02 = cph * sth * cps + sph * sps
        r10 = cth * sps
        r11 = sph * sth * sps + cph * cps
        r12 = cph * sth * sps - sph * cps
        r20 = -sth
        r21 = sph * cth
        r22 = cph * cth

        ax = (T * ci + fx) / mass + g * r20
        ay = fy / mass + g * r21
        az = (-T * si + fz) / mass + g * r22

        out[k, VB_DOT + 0] = ax - (q * w - r * v)
        out[k, VB_DOT + 1] = ay - (r * u - p * w)
        out[k, VB_DOT + 2] = az - (p * v - q * u)

        jx = J[0, 0] * p + J[0, 1] * q + J[0, 2] * r
        jy = J[1, 0] * p + J[1, 1] * q + J[1, 2] * r
        jz = J[2, 0] * p + J[2, 1] * q + J[2, 2] * r
        mx = Ml - (q * jz - r * jy)
        my = Mm - (r * jx - p * jz)
        mz = Mn - (p * jy - q * jx)
        out[k, OMEGA_DOT + 0] = Jinv[0, 0] * mx + Jinv[0, 1] * my + Jinv[0, 2] * mz
        out[k, OMEGA_DOT + 1] = Jinv[1, 0] * mx + Jinv[1, 1] * my + Jinv[1, 2] * mz
        out[k, OMEGA_DOT + 2] = Jinv[2, 0] * mx + Jinv[2, 1] * my + Jinv[2, 2] * mz

        qsr = q * sph + r * cph
        out[k, ETA_DOT + 0] = qsr / cth
        out[k, ETA_DOT + 1] = q * cph - r * sph
        out[k, ETA_DOT + 2] = p + qsr * sth / cth

        out[k, ACCEL + 0] = ax
        out[k, ACCEL + 1] = ay
        out[k, ACCEL + 2] = az
        out[k, VG_AIR + 0] = r00 * u + r01 * v + r02 * w
        out[k, VG_AIR + 1] = r10 * u + r11 * v + r12 * w
        out[k, VG_AIR + 2] = r20 * u + r21 * v + r22 * w
        out[k, V_COL] = V
        out[k, ALPHA_COL] = alpha
        out[k, BETA_COL] = beta
        out[k, COEF + 0] = CD
        out[k, COEF + 1] = CC
        out[k, COEF + 2] = CL
        out[k, COEF + 3] = Cl
        out[k, COEF + 4] = Cm
        out[k, COEF + 5] = Cn
    return OK
