"""
Adaptive moving-average smoothing of filter outputs.

Two trailing windows of length ``T1 > T2`` are kept per channel. Their means
are blended with the current sample; the blend shifts weight from the long
window to the short one when the two means disagree by more than a
threshold ``d``, so the output follows genuine changes quickly while staying
quiet when the input is only noisy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import NonMonotonicTime

# slack on window edges so that samples on a 100 Hz grid land where expected
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class AmaeConfig:
    T1: float = 5.0
    T2: float = 1.0
    d: float = 0.3
    k: float | None = None
    a: tuple = (0.45, 0.45, 0.10)

    def __post_init__(self):
        if not self.T1 > self.T2 > 0:
            raise ValueError(f"window lengths need T1 > T2 > 0, got T1={self.T1}, T2={self.T2}")
        if self.d < 0:
            raise ValueError("threshold d must be non-negative")
        a = tuple(float(v) for v in self.a)
        if len(a) != 3 or min(a) <= 0 or abs(sum(a) - 1.0) > 1e-12:
            raise ValueError(f"fixed weights must be three positive numbers summing to 1, got {self.a}")
        object.__setattr__(self, "a", a)
        if self.k is None:
            object.__setattr__(self, "k", 2.0 / self.d if self.d > 0 else 0.0)
        elif self.k < 0:
            raise ValueError("scaling coefficient k must be non-negative")


def amae_weights(y1, y2, cfg: AmaeConfig):
    """
    Blend weights for the long-window mean, short-window mean and current sample.

    Parameters
    ----------
    y1, y2 : float or ndarray
        Long- and short-window means (broadcast together).
    cfg : AmaeConfig

    Returns
    -------
    w1, w2, w3 : ndarray
        Non-negative weights with ``w1 + w2 + w3 == 1`` elementwise.
    """
    a1, a2, a3 = cfg.a
    gap = np.abs(np.asarray(y1, dtype=float) - np.asarray(y2, dtype=float))
    c = np.clip(cfg.k * (cfg.d - gap), -a1, a2)
    return a1 + c, a2 - c, np.full_like(c, a3)


class WindowBuffer:
    """
    Trailing-window means of a vector stream.

    Holds every sample in ``[t0 - T1, t0]`` where ``t0`` is the latest push
    time. Running sums are updated incrementally and refreshed from the
    stored samples once per window turnover, which bounds round-off drift
    independent of the stream length.
    """

    def __init__(self, T1, T2, n_channels=3):
        if not T1 > T2 > 0:
            raise ValueError("need T1 > T2 > 0")
        self.T1, self.T2 = float(T1), float(T2)
        self.n_channels = n_channels
        self.clear()

    def clear(self):
        self._long = deque()
        self._short = deque()
        self._sum_long = np.zeros(self.n_channels)
        self._sum_short = np.zeros(self.n_channels)
        self._since_refresh = 0
        self.t_first = None
        self.t_last = None

    def __len__(self):
        return len(self._long)

    @property
    def span(self):
        """Time covered by the stream so far (0 before the second push)."""
        return 0.0 if self.t_first is None else self.t_last - self.t_first

    def push(self, t, value):
        t = float(t)
        if self.t_last is not None and not t > self.t_last:
            raise NonMonotonicTime(f"push at t={t} after t={self.t_last}")
        value = np.array(value, dtype=float).reshape(self.n_channels)
        if self.t_first is None:
            self.t_first = t
        self.t_last = t
        self._long.append((t, value))
        self._short.append((t, value))
        self._sum_long += value
        self._sum_short += value
        self._evict(self._long, t - self.T1, "_sum_long")
        self._evict(self._short, t - self.T2, "_sum_short")
        self._since_refresh += 1
        if self._since_refresh >= len(self._long):
            self._refresh()
        return self

    def _evict(self, buf, t_min, attr):
        total = getattr(self, attr)
        while buf and buf[0][0] < t_min - _EDGE_TOL:
            total -= buf.popleft()[1]

    def _refresh(self):
        self._sum_long = np.sum([v for _, v in self._long], axis=0)
        self._sum_short = np.sum([v for _, v in self._short], axis=0)
        self._since_refresh = 0

    def means(self):
        """Return ``(y1, y2)``; both NaN when the buffer is empty."""
        if not self._long:
            nan = np.full(self.n_channels, np.nan)
            return nan, nan.copy()
        return self._sum_long / len(self._long), self._sum_short / len(self._short)

    def samples(self, window="long"):
        buf = self._long if window == "long" else self._short
        return np.array([t for t, _ in buf]), np.array([v for _, v in buf])


def smooth(x_k, buffer: WindowBuffer, cfg: AmaeConfig):
    """
    Smoothed value for the latest pushed sample ``x_k``.

    Returns ``x_k`` unchanged while the stream spans less than ``T2``.
    """
    x_k = np.asarray(x_k, dtype=float)
    if buffer.span < cfg.T2 - _EDGE_TOL:
        return x_k.copy()
    y1, y2 = buffer.means()
    w1, w2, w3 = amae_weights(y1, y2, cfg)
    return w1 * y1 + w2 * y2 + w3 * x_k


class AdaptiveMovingAverage(TransformerMixin, BaseEstimator):
    """
    Dual-window adaptive smoother as a scikit-learn transformer.

    Each column of the input is smoothed independently with its own window
    means and weights.

    Parameters
    ----------
    T1, T2 : float
        Long and short window lengths in seconds.
    d : float
        Decision threshold on the gap between window means.
    k : float, optional
        Gain of the adaptive weight term; defaults to ``2 / d``.
    a : tuple of 3 floats
        Fixed weights for long mean, short mean and current sample.
    dt : float
        Sample spacing assumed when ``transform`` is given no time vector.
    """

    def __init__(self, T1=5.0, T2=1.0, d=0.3, k=None, a=(0.45, 0.45, 0.10), dt=0.01):
        self.T1 = T1
        self.T2 = T2
        self.d = d
        self.k = k
        self.a = a
        self.dt = dt

    def fit(self, X=None, y=None):
        self.config_ = AmaeConfig(self.T1, self.T2, self.d, self.k, tuple(self.a))
        return self

    def transform(self, X, t=None):
        """
        Parameters
        ----------
        X : array-like, shape (n_samples, n_channels)
        t : array-like, shape (n_samples,), optional
            Strictly increasing sample times.

        Returns
        -------
        ndarray, shape (n_samples, n_channels)
        """
        check_is_fitted(self, "config_")
        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        if squeeze:
            X = X[:, None]
        t = np.arange(len(X)) * self.dt if t is None else np.asarray(t, dtype=float)
        if len(t) != len(X):
            raise ValueError(f"time vector has {len(t)} samples, data has {len(X)}")
        buf = WindowBuffer(self.config_.T1, self.config_.T2, X.shape[1])
        out = np.empty_like(X)
        for i in range(len(X)):
            buf.push(t[i], X[i])
            out[i] = smooth(X[i], buf, self.config_)
        return out[:, 0] if squeeze else out
