import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerowind.amae import AdaptiveMovingAverage, AmaeConfig, WindowBuffer, amae_weights, smooth
from aerowind.exceptions import NonMonotonicTime


def random_configs(rng, n):
    a = rng.dirichlet([1, 1, 1], n) * 0.98 + 0.02 / 3
    return a, rng.uniform(0.01, 2.0, n), rng.uniform(0, 100, n)


def test_weight_simplex_on_1e5_random_inputs(rng):
    n = 100_000
    a, d, k = random_configs(rng, n)
    y1, y2 = rng.normal(scale=3, size=(2, n))
    c = np.clip(k * (d - np.abs(y1 - y2)), -a[:, 0], a[:, 1])
    w1, w2, w3 = a[:, 0] + c, a[:, 1] - c, a[:, 2]
    # same draw through the library, one config at a time on a subsample
    for i in range(0, n, 997):
        cfg = AmaeConfig(5.0, 1.0, float(d[i]), float(k[i]), tuple(a[i] / a[i].sum()))
        got = amae_weights(y1[i], y2[i], cfg)
        assert np.allclose(got, (w1[i], w2[i], w3[i]), atol=1e-12)
    cfg = AmaeConfig()
    W = np.array(amae_weights(y1, y2, cfg))
    assert W.min() >= 0.0
    assert np.abs(W.sum(axis=0) - 1.0).max() <= 1e-15


@settings(max_examples=300, deadline=None)
@given(y1=st.floats(-1e3, 1e3), y2=st.floats(-1e3, 1e3), d=st.floats(0.0, 5.0),
       k=st.floats(0.0, 1e3))
def test_weight_simplex_property(y1, y2, d, k):
    w = np.array(amae_weights(y1, y2, AmaeConfig(d=d, k=k)))
    assert np.all(w >= 0) and abs(w.sum() - 1.0) < 1e-15


def test_weight_regimes():
    cfg = AmaeConfig()                       # d = 0.3, k = 2 / d
    assert np.allclose(amae_weights(1.0, 1.3, cfg), (0.45, 0.45, 0.10))
    assert np.allclose(amae_weights(1.0, 1.0, cfg), (0.90, 0.0, 0.10))
    assert np.allclose(amae_weights(1.0, 3.0, cfg), (0.0, 0.90, 0.10))
    # the gap where the short window takes everything: k (d - gap) = -a1
    gap = cfg.d + cfg.a[0] / cfg.k
    assert np.allclose(amae_weights(0.0, gap, cfg), (0.0, 0.9, 0.1))
    w_mid = amae_weights(0.0, 0.5 * (cfg.d + gap), cfg)
    assert 0.0 < w_mid[0] < 0.45


@settings(max_examples=200, deadline=None)
@given(y1=st.floats(-50, 50), y2=st.floats(-50, 50), x=st.floats(-50, 50))
def test_output_is_convex_combination(y1, y2, x):
    cfg = AmaeConfig()
    w = amae_weights(y1, y2, cfg)
    out = w[0] * y1 + w[1] * y2 + w[2] * x
    lo, hi = min(y1, y2, x), max(y1, y2, x)
    assert lo - 1e-9 <= out <= hi + 1e-9


def test_buffer_incremental_matches_batch_after_1e6_pushes(rng):
    n = 1_000_000
    x = rng.normal(size=(n, 3)) + 1e3
    buf = WindowBuffer(5.0, 1.0)
    for i in range(n):
        buf.push(i * 0.01, x[i])
    y1, y2 = buf.means()
    assert len(buf) == 501
    assert np.abs(y1 - x[-501:].mean(axis=0)).max() <= 1e-12
    assert np.abs(y2 - x[-101:].mean(axis=0)).max() <= 1e-12


def test_buffer_rejects_non_increasing_time():
    buf = WindowBuffer(5.0, 1.0, 1)
    buf.push(0.0, [1.0]).push(0.01, [2.0])
    before = buf.means()
    for bad in (0.01, 0.005):
        with pytest.raises(NonMonotonicTime):
            buf.push(bad, [100.0])
    assert np.array_equal(buf.means()[0], before[0]) and len(buf) == 2


def test_buffer_empty_and_clear():
    buf = WindowBuffer(2.0, 1.0, 2)
    assert np.isnan(buf.means()[0]).all() and buf.span == 0.0
    buf.push(0.0, [1, 2]).push(1.0, [3, 4])
    assert buf.span == 1.0
    t, _ = buf.samples("short")
    assert np.array_equal(t, [0.0, 1.0])
    buf.clear()
    assert len(buf) == 0


def test_raw_output_before_short_window_fills():
    cfg = AmaeConfig()
    buf = WindowBuffer(cfg.T1, cfg.T2, 1)
    for i in range(100):
        buf.push(i * 0.01, [float(i)])
        assert smooth([float(i)], buf, cfg)[0] == float(i)
    buf.push(1.0, [100.0])
    assert smooth([100.0], buf, cfg)[0] != 100.0


def step_response(k, step=1.0):
    t = np.arange(0, 20, 0.01)
    x = np.where(t >= 8.0, step, 0.0)
    return t - 8.0, AdaptiveMovingAverage(k=k).fit().transform(x, t)


def test_step_response_speeds_up_with_gain():
    rise = {}
    for k in (0.0, 2 / 0.3, 20 / 0.3):
        t, y = step_response(k)
        rise[k] = t[np.argmax(y >= 0.9)]
        # once the window means agree within d the long window regains weight,
        # which can pull the output back, but never by more than d
        after = y[t >= rise[k]]
        assert after.min() >= 1.0 - 0.3 - 1e-12
    # fixed weights: the 5 s window sets the response; adaptive: the 1 s window
    assert rise[0.0] > 3.0
    assert rise[2 / 0.3] < 1.0 and rise[20 / 0.3] <= rise[2 / 0.3]


def test_noise_is_reduced_without_lag_on_constant_input(rng):
    t = np.arange(0, 60, 0.01)
    x = 3.0 + rng.normal(scale=0.1, size=len(t))
    y = AdaptiveMovingAverage().fit().transform(x, t)
    assert y[t >= 5].std() < 0.3 * x.std()
    assert abs(y[t >= 5].mean() - 3.0) < 0.01


def test_transformer_columns_independent(rng):
    X = rng.normal(size=(800, 3)).cumsum(axis=0) * 0.05
    amae = AdaptiveMovingAverage(T1=2.0, T2=0.5).fit()
    full = amae.transform(X)
    for j in range(3):
        assert np.allclose(full[:, j], amae.transform(X[:, j]), rtol=0, atol=1e-14)
    with pytest.raises(ValueError):
        amae.transform(X, np.arange(10.0))


def test_config_validation():
    assert AmaeConfig(d=0.5).k == pytest.approx(4.0)
    for bad in (dict(T1=1.0, T2=1.0), dict(d=-1), dict(a=(0.5, 0.5, 0.5)), dict(k=-1.0),
                dict(a=(1.0, 0.0, 0.0))):
        with pytest.raises(ValueError):
            AmaeConfig(**bad)
