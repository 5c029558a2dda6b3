"""
Wind scenarios: deterministic steady/linear/abrupt/sinusoidal profiles plus
Dryden turbulence, combined as ``total = steady + gust``.

Inertial frame, z down: a negative ``w_z`` is an updraft.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm, solve_discrete_lyapunov

SCENARIOS = ("steady", "linear", "abrupt", "sinusoidal")


def steady_profile(t, wind=(5.0, 5.0, -1.0)):
    t = np.asarray(t, dtype=float)
    return np.broadcast_to(np.asarray(wind, dtype=float), t.shape + (3,)).copy()


def linear_profile(t, start=(2.0, 2.0, -1.0), rate=(0.2, 0.1, -0.05), t_start=30.0, t_end=60.0):
    """Constant, then a linear ramp on ``[t_start, t_end]``, then constant."""
    t = np.asarray(t, dtype=float)
    tau = np.clip(t, t_start, t_end) - t_start
    return np.asarray(start) + tau[..., None] * np.asarray(rate)


def abrupt_profile(t, start=(2.0, 2.0, -1.0), step=(5.0, 5.0, -1.0), center=35.0, rate=0.7,
                   t_end=60.0):
    """
    Logistic transition centred on ``center``; held at the final plateau after
    ``t_end``.  No clamp is applied before the transition: the logistic is
    within 5e-10 of the initial plateau at t = 0, while clamping at t = 30
    would introduce a 0.15 m/s jump.
    """
    t = np.asarray(t, dtype=float)
    s = 1.0 / (1.0 + np.exp(-rate * (t - center)))
    s = np.where(t >= t_end, 1.0, s)
    return np.asarray(start) + s[..., None] * np.asarray(step)


def sinusoidal_profile(t, phase=0.0, mean=(5.0, 5.0, -1.0), amplitude=(2.0, 2.0, 0.5), omega=0.1):
    t = np.asarray(t, dtype=float)
    arg = omega * t + phase
    mean = np.asarray(mean)
    amp = np.asarray(amplitude)
    return np.stack([mean[0] + amp[0] * np.sin(arg),
                     mean[1] + amp[1] * np.cos(arg),
                     mean[2] + amp[2] * np.sin(arg)], axis=-1)


# -- Dryden turbulence ------------------------------------------------------

@dataclass(frozen=True)
class DrydenParams:
    """
    Turbulence intensities (m/s), scale lengths (m) and the mean airspeed that
    converts spatial scales to time constants.
    """

    sigma_u: float = 0.5
    sigma_v: float = 0.5
    sigma_w: float = 0.3
    L_u: float = 533.4
    L_v: float = 533.4
    L_w: float = 533.4
    V0: float = 16.8
    seed: int = 0

    def __post_init__(self):
        for name in ("sigma_u", "sigma_v", "sigma_w", "L_u", "L_v", "L_w", "V0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("L_u", "L_v", "L_w", "V0"):
            if getattr(self, name) == 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def low_altitude(cls, altitude, sigma_w, V0=16.8, seed=0):
        """
        Low-altitude Dryden scales and intensity ratios (MIL-F-8785C form),
        evaluated in feet internally.
        """
        h_ft = max(altitude, 1.0) / 0.3048
        k = 0.177 + 0.000823 * h_ft
        L_w = altitude
        L_u = h_ft / k ** 1.2 * 0.3048
        sigma_u = sigma_w / k ** 0.4
        return cls(sigma_u, sigma_u, sigma_w, L_u, L_u, L_w, V0, seed)


class _ShapingFilter:
    """Exact discretisation of one Dryden channel driven by unit white noise."""

    def __init__(self, sigma, L, V0, dt, order):
        tau = L / V0
        if order == 1:
            A = np.array([[-1.0 / tau]])
            B = np.array([[1.0]])
            C = np.array([[1.0]])
        else:
            # (1 + sqrt(3) tau s) / (1 + tau s)^2 in controllable canonical form
            A = np.array([[0.0, 1.0], [-1.0 / tau**2, -2.0 / tau]])
            B = np.array([[0.0], [1.0]])
            C = np.array([[1.0 / tau**2, np.sqrt(3.0) / tau]])
        n = A.shape[0]
        # Van Loan: discrete transition and process-noise covariance
        M = np.zeros((2 * n, 2 * n))
        M[:n, :n] = -A
        M[:n, n:] = B @ B.T
        M[n:, n:] = A.T
        E = expm(M * dt)
        self.Phi = E[n:, n:].T
        Qd = self.Phi @ E[:n, n:]
        Qd = 0.5 * (Qd + Qd.T)
        self.G = np.linalg.cholesky(Qd + 1e-300 * np.eye(n))
        P = solve_discrete_lyapunov(self.Phi, Qd)
        var = float((C @ P @ C.T)[0, 0])
        self.C = C[0] * (sigma / np.sqrt(var)) if sigma > 0 else C[0] * 0.0
        self.P_stationary = P
        self.x = np.zeros(n)
        self.n = n

    def reset(self, rng):
        self.x = np.linalg.cholesky(self.P_stationary + 1e-300 * np.eye(self.n)) @ rng.standard_normal(self.n)

    def step(self, noise):
        y = float(self.C @ self.x)
        self.x = self.Phi @ self.x + self.G @ noise
        return y


class DrydenGust:
    """
    Seeded three-axis Dryden gust generator.

    The longitudinal channel is first order, lateral and vertical second order.
    Filters start from a draw of their stationary distribution, so the output
    is stationary from the first sample.
    """

    def __init__(self, params: DrydenParams, dt=0.01):
        self.params = params
        self.dt = dt
        p = params
        self._filters = [
            _ShapingFilter(p.sigma_u, p.L_u, p.V0, dt, 1),
            _ShapingFilter(p.sigma_v, p.L_v, p.V0, dt, 2),
            _ShapingFilter(p.sigma_w, p.L_w, p.V0, dt, 2),
        ]
        self.reset()

    def reset(self, seed=None):
        self.rng = np.random.default_rng(self.params.seed if seed is None else seed)
        for f in self._filters:
            f.reset(self.rng)

    def step(self):
        """Return the current gust ``(u_g, v_g, w_g)`` and advance one ``dt``."""
        return np.array([f.step(self.rng.standard_normal(f.n)) for f in self._filters])

    def generate(self, n):
        return np.array([self.step() for _ in range(n)]).reshape(n, 3)


def dryden_step(gust: DrydenGust):
    return gust.step()


# -- scenarios --------------------------------------------------------------

class WindSample(NamedTuple):
    t: float
    steady: np.ndarray
    gust: np.ndarray
    total: np.ndarray


@dataclass(frozen=True)
class WindScenario:
    """
    A named deterministic profile plus optional turbulence.

    ``params`` are forwarded as keyword arguments to the profile function.
    """

    kind: str = "steady"
    params: dict = field(default_factory=dict)
    turbulence: DrydenParams | None = field(default_factory=DrydenParams)

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.kind!r}; valid: {', '.join(SCENARIOS)}")

    def steady(self, t):
        fn = {"steady": steady_profile, "linear": linear_profile,
              "abrupt": abrupt_profile, "sinusoidal": sinusoidal_profile}[self.kind]
        return fn(t, **self.params)

    def generate(self, t, seed=None):
        """
        Wind samples on a uniform time grid.

        Returns
        -------
        steady, gust, total : ndarray, shape (len(t), 3)
        """
        t = np.asarray(t, dtype=float)
        steady = self.steady(t)
        if self.turbulence is None or len(t) == 0:
            gust = np.zeros_like(steady)
        else:
            dt = float(t[1] - t[0]) if len(t) > 1 else 0.01
            turb = self.turbulence
            if seed is not None:
                turb = DrydenParams(**{**turb.__dict__, "seed": seed})
            gust = DrydenGust(turb, dt).generate(len(t))
        return steady, gust, steady + gust

    def samples(self, t, seed=None):
        steady, gust, total = self.generate(t, seed)
        return [WindSample(float(ti), s, g, w) for ti, s, g, w in zip(t, steady, gust, total)]
