import dataclasses

import numpy as np
import pytest

from aerowind.evaluation import (
    COMPONENTS,
    METHODS,
    SweepSpec,
    direct_wind,
    direct_wind_series,
    interpolate_gnss,
    rmse,
    run_scenario,
    run_sweep,
    wind_components,
)
from aerowind.exceptions import EmptyWindow, MissingFlowAngles
from aerowind.sensors import MeasurementFrame, SensorSpec
from aerowind.wind import WindScenario


def direction_vector(deg):
    r = np.radians(deg)
    return np.array([np.cos(r), np.sin(r), 0.0])


def test_direction_wrap_fixture():
    assert rmse(np.array([359.0]), np.array([0.0]), "hdir") == 1.0
    assert rmse(np.array([1.0]), np.array([0.0]), "hdir") == 1.0
    assert rmse(np.array([179.0, -179.0]), np.array([-179.0, 179.0]), "hdir") == 2.0
    est = np.array([direction_vector(359.0)])
    ref = np.array([direction_vector(0.0)])
    assert rmse(est, ref, "hdir") == pytest.approx(1.0, abs=1e-12)


def test_five_point_hand_fixture():
    est = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    assert rmse(est, np.ones(5)) == pytest.approx(np.sqrt(6.0), rel=1e-15)
    t = np.array([0.0, 5.0, 10.0, 15.0, 20.0])
    # warm-up keeps t >= 10: errors 2, 3, 4
    assert rmse(est, np.ones(5), t=t, warmup=10.0) == pytest.approx(np.sqrt(29 / 3))
    est[3] = np.nan
    assert rmse(est, np.ones(5), t=t, warmup=10.0) == pytest.approx(np.sqrt(10))
    with pytest.raises(EmptyWindow):
        rmse(est, np.ones(5), t=t, warmup=30.0)


def test_wind_components():
    c = wind_components(np.array([[5.0, 5.0, -1.0], [0.0, -2.0, 0.5]]))
    assert np.allclose(c["hspeed"], [np.sqrt(50), 2.0])
    assert np.allclose(c["hdir"], [45.0, -90.0])
    assert np.allclose(c["vspeed"], [-1.0, 0.5])


def test_direct_calculation_exact_without_noise(config):
    setup = dataclasses.replace(config.experiment(duration=3.0), sensors=config.sensors.noise_free())
    sim = setup.simulate(2)
    direct = direct_wind_series(sim.log, interpolate=False)
    have = np.isfinite(direct[:, 0])
    assert have.sum() == 31
    assert np.abs(direct[have] - sim.wind[have]).max() < 1e-12
    k = int(np.flatnonzero(have)[3])
    assert np.allclose(direct_wind(sim.log.frame(k)), sim.wind[k], atol=1e-12)
    with pytest.raises(MissingFlowAngles):
        direct_wind(MeasurementFrame(0.0, sim.log.z[0], sim.log.mask[0], None))


def test_gnss_interpolation(config):
    setup = config.experiment(duration=2.0, sensors=dataclasses.replace(config.sensors,
                                                                        gnss_rate=5.0))
    log = setup.simulate(0).log
    out = interpolate_gnss(log)
    have = ~np.isnan(log.z[:, 0])
    assert np.isfinite(out.z[:, 0:3]).all()
    assert np.array_equal(out.z[have, 0:3], log.z[have, 0:3])
    i0, i1 = np.flatnonzero(have)[:2]
    mid = (i0 + i1) // 2
    frac = (log.t[mid] - log.t[i0]) / (log.t[i1] - log.t[i0])
    assert out.z[mid, 0] == pytest.approx(log.z[i0, 0] + frac * (log.z[i1, 0] - log.z[i0, 0]))
    assert np.array_equal(out.z[:, 3:], log.z[:, 3:], equal_nan=True)


def test_direct_needs_vanes(config):
    setup = config.experiment(duration=1.0, sensors=SensorSpec())
    with pytest.raises(MissingFlowAngles):
        direct_wind_series(setup.simulate(0).log)


@pytest.fixture(scope="module")
def short_setup(config):
    return config.experiment(duration=15.0)


def test_scenario_report_shape_and_determinism(short_setup):
    rep = run_scenario(short_setup, seeds=[0, 1], warmup=5.0)
    assert rep.rmse.shape == (2, len(METHODS), len(COMPONENTS))
    assert np.isfinite(rep.rmse).all()
    table = rep.table()
    assert list(table["method"]) == list(METHODS)
    assert {"hspeed", "hspeed_std", "hdir", "vspeed_std"} <= set(table.columns)
    par = run_scenario(short_setup, seeds=[0, 1], warmup=5.0, n_jobs=2, keep_runs=False)
    assert np.array_equal(rep.rmse, par.rmse)
    assert rep.mean("EKF", "hspeed") == pytest.approx(rep.rmse[:, 1, 0].mean())


def test_no_amae_reports_two_methods(short_setup):
    rep = run_scenario(dataclasses.replace(short_setup, use_amae=False), seeds=1, warmup=5.0)
    assert list(rep.table()["method"]) == ["Calculation", "EKF"]


def test_sweep_baseline_matches_scenario(short_setup):
    spec = SweepSpec("C_L0", (-0.1, 0.0, 0.1))
    assert spec.param == "CL0"
    rep = run_sweep(short_setup, spec, seeds=[3], warmup=5.0)
    base = run_scenario(short_setup, seeds=[3], warmup=5.0)
    assert np.allclose(rep.row(0.0)[3:], base.rmse[0, 2])
    assert rep.values.shape == (1, 3, 6)
    assert rep.reference["CL"] > 0
    # estimated lift coefficient is close to truth at zero model error
    assert rep.row(0.0)[1] == pytest.approx(rep.reference["CL"], rel=0.05)
    table = rep.table()
    assert list(table["delta"]) == [-0.1, 0.0, 0.1]
    assert np.array_equal(rep.column("vspeed"), table["vspeed"].to_numpy())


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec("CL0", (0.1, 0.2))
    with pytest.raises(ValueError):
        SweepSpec("Cm0")
    assert 0.0 in SweepSpec().grid and len(SweepSpec().grid) == 11


def test_scenarios_run_with_steady_truth_reference(short_setup):
    rep = run_scenario(dataclasses.replace(short_setup, scenario=WindScenario("linear", {}, None)),
                       seeds=1, warmup=5.0)
    run = rep.runs[0]
    assert np.array_equal(run.series.truth, run.sim.wind)
    assert np.array_equal(run.sim.wind, run.sim.wind_steady)
