import numpy as np
import pytest

from aerowind.exceptions import ClockMisaligned
from aerowind.sensors import (
    N_OBS,
    MeasurementLog,
    SensorSpec,
    SensorSuite,
    enable_flow_vanes,
    measure,
    true_observation,
)
from aerowind.simulation import simulate
from aerowind.wind import WindScenario

N = 100_000


def constant_truth(n):
    vb = np.tile([16.7, 0.2, 1.1], (n, 1))
    om = np.tile([0.01, -0.02, 0.03], (n, 1))
    eta = np.tile([0.4, 0.05, -0.1], (n, 1))
    wind = np.tile([5.0, 5.0, -1.0], (n, 1))
    acc = np.tile([0.3, 0.0, 9.7], (n, 1))
    return vb, om, eta, wind, acc


def test_noise_std_within_two_percent_and_white():
    spec = enable_flow_vanes(SensorSpec(gnss_rate=100.0, seed=9))
    suite = SensorSuite(spec)
    t = np.arange(N) * 0.01
    truth = constant_truth(N)
    z, flow = suite.measure_batch(t, *truth)
    err = z - true_observation(*truth)
    std = spec.observation_std()
    assert np.allclose(err.std(axis=0), std, rtol=0.02)
    ferr = flow - [np.arctan2(1.1, 16.7), np.arcsin(0.2 / np.linalg.norm([16.7, 0.2, 1.1]))]
    assert np.allclose(ferr.std(axis=0), np.radians(1.0), rtol=0.02)
    bound = 4.0 / np.sqrt(N)
    for j in range(N_OBS):
        e = err[:, j] - err[:, j].mean()
        assert abs(np.dot(e[:-1], e[1:]) / np.dot(e, e)) < bound
    # channels are mutually uncorrelated
    C = np.corrcoef(err.T)
    assert np.abs(C - np.eye(N_OBS)).max() < bound


def test_multirate_availability():
    suite = SensorSuite(SensorSpec())
    t = np.arange(100) * 0.01
    mask = suite.availability(t)
    assert mask[:, 3:].all()
    gnss = np.flatnonzero(mask[:, 0])
    assert np.array_equal(gnss, np.arange(0, 100, 10))
    assert np.array_equal(mask[:, 0], mask[:, 2])


def test_gnss_five_hz():
    spec = SensorSpec(gnss_rate=5.0)
    assert spec.decimation()[0] == 20
    mask = SensorSuite(spec).availability(np.arange(100) * 0.01)
    assert mask[:, 0].sum() == 5


def test_noise_free_measurement_is_exact():
    spec = enable_flow_vanes(SensorSpec()).noise_free()
    truth = constant_truth(20)
    z, flow = SensorSuite(spec).measure_batch(np.arange(20) * 0.01, *truth)
    ref = true_observation(*truth)
    avail = ~np.isnan(z)
    assert np.array_equal(z[avail], ref[avail])
    assert np.isfinite(flow).all()


def test_clock_alignment_and_rates():
    with pytest.raises(ClockMisaligned):
        SensorSuite().availability(np.array([0.005]))
    with pytest.raises(ValueError):
        SensorSpec(gnss_rate=7.0)
    with pytest.raises(ValueError):
        SensorSpec(accel_std=-0.1)


def test_single_frame_measure(trim):
    s, _ = trim
    f = measure(s, np.zeros(3), [0, 0, 9.81], SensorSpec(seed=1).noise_free(), 0.0)
    assert f.mask.all()
    assert f.z[12] == pytest.approx(16.8)
    f = measure(s, np.zeros(3), [0, 0, 9.81], SensorSpec(), 0.01)
    assert not f.mask[0] and np.isnan(f.z[0]) and f.mask[3]


def test_log_container(params, aero):
    sim = simulate(WindScenario("steady"), params, aero, enable_flow_vanes(SensorSpec()), 1.0)
    log = sim.log
    assert len(log) == 101 and log.has_flow
    f = log.frame(10)
    assert f.t == pytest.approx(0.1) and f.mask.all()
    assert not log.frame(11).mask[0]
    part = log[10:20]
    assert isinstance(part, MeasurementLog) and len(part) == 10
    assert np.array_equal(part.z, log.z[10:20], equal_nan=True)
    assert np.array_equal(log.mask, ~np.isnan(log.z))


def test_simulation_is_seeded(params, aero):
    a = simulate(WindScenario("steady"), params, aero, SensorSpec(), 2.0, seed=4)
    b = simulate(WindScenario("steady"), params, aero, SensorSpec(), 2.0, seed=4)
    c = simulate(WindScenario("steady"), params, aero, SensorSpec(), 2.0, seed=5)
    assert np.array_equal(a.log.z, b.log.z, equal_nan=True)
    assert not np.array_equal(a.log.z, c.log.z, equal_nan=True)
    assert np.array_equal(a.wind, a.wind_steady + a.wind_gust)
