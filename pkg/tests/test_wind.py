import numpy as np
import pytest

from aerowind.wind import (
    SCENARIOS,
    DrydenGust,
    DrydenParams,
    WindScenario,
    abrupt_profile,
    linear_profile,
    sinusoidal_profile,
    steady_profile,
)


def acf(x, lag):
    x = x - x.mean()
    return float(np.dot(x[:-lag], x[lag:]) / np.dot(x, x) * len(x) / (len(x) - lag))


def test_steady_profile():
    w = steady_profile(np.linspace(0, 90, 7))
    assert np.all(w == [5.0, 5.0, -1.0])
    assert np.hypot(*w[0, :2]) == pytest.approx(7.0711, abs=1e-4)
    assert np.all(steady_profile(3.0, (0, 0, 0)) == 0)


def test_linear_profile_breakpoints():
    w = linear_profile(np.array([0.0, 30.0, 45.0, 60.0, 90.0]))
    assert np.allclose(w[0], [2, 2, -1]) and np.allclose(w[1], [2, 2, -1])
    assert np.allclose(w[2], [5, 3.5, -1.75])
    assert np.allclose(w[3], [8, 5, -2.5]) and np.allclose(w[4], [8, 5, -2.5])


def test_abrupt_profile():
    assert abrupt_profile(35.0)[0] == pytest.approx(4.5)
    assert np.allclose(abrupt_profile(60.0), [7, 7, -2], atol=1e-7)
    assert np.allclose(abrupt_profile(0.0), [2, 2, -1], atol=1e-9)
    tau = np.linspace(0, 24.9, 50)
    assert np.allclose(abrupt_profile(35 + tau)[:, 0] + abrupt_profile(35 - tau)[:, 0], 9.0)


@pytest.mark.parametrize("kind", SCENARIOS)
def test_profiles_are_continuous(kind):
    t = np.arange(0, 90, 1e-3)
    w = WindScenario(kind, turbulence=None).steady(t)
    assert np.abs(np.diff(w, axis=0)).max() < 2e-3


def test_sinusoidal_profile():
    t = np.linspace(0, 200, 20001)
    w = sinusoidal_profile(t)
    assert w[:, 0].min() == pytest.approx(3, abs=1e-6) and w[:, 0].max() == pytest.approx(7, abs=1e-6)
    assert w[:, 2].min() == pytest.approx(-1.5, abs=1e-6)
    assert w[:, 2].max() == pytest.approx(-0.5, abs=1e-6)
    assert np.allclose((w[:, 0] - 5) ** 2 + (w[:, 1] - 5) ** 2, 4.0)
    period = 2 * np.pi / 0.1
    assert np.allclose(sinusoidal_profile(t + period), w)


def test_dryden_stationary_variance_exact():
    g = DrydenGust(DrydenParams(), dt=0.01)
    for f, sigma in zip(g._filters, (0.5, 0.5, 0.3)):
        assert float(f.C @ f.P_stationary @ f.C) == pytest.approx(sigma**2, rel=1e-9)


def test_dryden_sampled_std_and_correlation_length():
    # short scale lengths keep the sample long relative to the correlation time
    V0, dt = 16.8, 0.05
    for L in (30.0, 60.0):
        p = DrydenParams(0.5, 0.5, 0.3, L, L, L, V0, seed=4)
        gust = DrydenGust(p, dt).generate(100_000)
        assert np.allclose(gust.std(axis=0), [0.5, 0.5, 0.3], rtol=0.2)
        # first-order longitudinal channel: ACF(L / V0) = exp(-1)
        lag = int(round(L / V0 / dt))
        assert acf(gust[:, 0], lag) == pytest.approx(np.exp(-1), abs=0.05)


def test_dryden_seeded():
    a = DrydenGust(DrydenParams(seed=1)).generate(200)
    b = DrydenGust(DrydenParams(seed=1)).generate(200)
    c = DrydenGust(DrydenParams(seed=2)).generate(200)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_total_is_steady_plus_gust():
    t = np.arange(0, 10, 0.01)
    steady, gust, total = WindScenario("linear").generate(t, seed=5)
    assert np.array_equal(total, steady + gust)
    assert np.abs(gust).max() > 0
    s = WindScenario("steady").samples(t[:3], seed=5)
    assert np.array_equal(s[1].total, s[1].steady + s[1].gust)
    _, gust0, _ = WindScenario("steady", turbulence=None).generate(t)
    assert not gust0.any()


def test_invalid_inputs():
    with pytest.raises(ValueError):
        WindScenario("gusty")
    with pytest.raises(ValueError):
        DrydenParams(L_u=0.0)
    with pytest.raises(ValueError):
        DrydenParams(sigma_u=-1.0)
