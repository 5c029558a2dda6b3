"""
Experiment harness: direct velocity-triangle baseline, wind RMSE metrics,
scenario runs over several seeds and aerodynamic-coefficient error sweeps.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .aero import AeroCoefficients, apply_perturbation
from .amae import AdaptiveMovingAverage
from .dynamics import RigidBodyParams, flight_terms
from .ekf import WIND, WindEKF
from .exceptions import EmptyWindow, MissingFlowAngles
from .frames import body_velocity_from_flow, rotation_body_to_inertial, wrap_degrees
from .sensors import GNSS_ROWS, MeasurementLog, SensorSpec, enable_flow_vanes
from .simulation import SimulationResult, simulate
from .wind import WindScenario

METHODS = ("Calculation", "EKF", "EKF+AMAE")
COMPONENTS = ("hspeed", "hdir", "vspeed")
COMPONENT_UNITS = {"hspeed": "m/s", "hdir": "deg", "vspeed": "m/s"}
SWEEP_PARAMS = {"CL0": "CL0", "C_L0": "CL0", "CLalpha": "CLalpha", "C_Lalpha": "CLalpha",
                "CD0": "CD0", "C_D0": "CD0"}
DEFAULT_WARMUP = 10.0


# -- metrics ----------------------------------------------------------------

def wind_components(wind):
    """
    Horizontal speed (m/s), horizontal direction (deg, ``atan2(w_y, w_x)``)
    and vertical speed (m/s) of inertial wind vectors.
    """
    wind = np.asarray(wind, dtype=float)
    hspeed = np.hypot(wind[..., 0], wind[..., 1])
    hdir = wrap_degrees(np.degrees(np.arctan2(wind[..., 1], wind[..., 0])))
    return {"hspeed": hspeed, "hdir": hdir, "vspeed": wind[..., 2]}


def rmse(estimate, truth, component=None, t=None, warmup=0.0):
    """
    Root-mean-square error after discarding samples with ``t < warmup``.

    ``estimate`` and ``truth`` are either ``(N, 3)`` wind vectors, in which
    case ``component`` selects ``hspeed``, ``hdir`` or ``vspeed``, or 1-D
    component series. Direction errors are wrapped to (-180, 180] before
    squaring. Non-finite estimate samples are skipped.

    Raises
    ------
    EmptyWindow
        If no finite samples remain after the warm-up trim.
    """
    est = np.asarray(estimate, dtype=float)
    ref = np.asarray(truth, dtype=float)
    if component is not None and est.ndim == 2:
        est = wind_components(est)[component]
        ref = wind_components(ref)[component]
    err = est - ref
    if component == "hdir":
        err = wrap_degrees(err)
    keep = np.isfinite(err)
    if t is not None:
        keep &= np.asarray(t, dtype=float) >= warmup - 1e-9
    if not keep.any():
        raise EmptyWindow(f"no samples left after a {warmup:g} s warm-up trim")
    return float(np.sqrt(np.mean(err[keep] ** 2)))


# -- direct baseline --------------------------------------------------------

def interpolate_gnss(log: MeasurementLog) -> MeasurementLog:
    """
    Copy of ``log`` with the GNSS velocity rows linearly interpolated onto
    every tick. Values at GNSS sample times are kept exactly; ticks outside
    the first/last GNSS sample hold the nearest sample.
    """
    z = log.z.copy()
    for j in range(GNSS_ROWS.start, GNSS_ROWS.stop):
        have = np.isfinite(z[:, j])
        if have.sum() == 0:
            continue
        z[:, j] = np.interp(log.t, log.t[have], z[have, j])
    return MeasurementLog(log.t, z, log.controls, log.flow)


def direct_wind(frame):
    """
    Velocity-triangle wind from one frame with vane angles.

    Raises
    ------
    MissingFlowAngles
        If the frame carries no finite ``(alpha_m, beta_m)``.
    """
    flow = frame.flow
    if flow is None or not np.all(np.isfinite(flow)):
        raise MissingFlowAngles(f"no vane angles at t={frame.t}")
    z = np.asarray(frame.z, dtype=float)
    v_b = body_velocity_from_flow(z[12], flow[0], flow[1])
    return z[0:3] - rotation_body_to_inertial(z[6:9]) @ v_b


def direct_wind_series(log: MeasurementLog, interpolate=True):
    """
    Direct wind at every tick of ``log`` (NaN where a channel is missing).

    GNSS is interpolated onto the grid first unless ``interpolate`` is False.
    """
    if not log.has_flow:
        raise MissingFlowAngles("log has no vane angle channels")
    if interpolate:
        log = interpolate_gnss(log)
    z = log.z
    v_b = body_velocity_from_flow(z[:, 12], log.flow[:, 0], log.flow[:, 1])
    r_gb = rotation_body_to_inertial(z[:, 6:9])
    return z[:, 0:3] - np.einsum("nij,nj->ni", r_gb, v_b)


# -- estimation pipeline ----------------------------------------------------

@dataclass
class PipelineResult:
    t: np.ndarray
    states: np.ndarray
    wind_ekf: np.ndarray
    wind_amae: np.ndarray | None
    derived: dict
    ekf: WindEKF


def estimate_log(log: MeasurementLog, params: RigidBodyParams, aero: AeroCoefficients | None = None,
                 ekf_options: dict | None = None, amae_options: dict | None = None,
                 use_amae=True, smooth_full_state=False) -> PipelineResult:
    """
    Run the EKF and, optionally, the adaptive smoother over a measurement log.

    This is the only estimation path: simulation experiments and log replay
    both call it.
    """
    ekf = WindEKF(params=params, aero=aero, **(ekf_options or {})).fit()
    states = ekf.transform(log)
    wind_amae = None
    if use_amae:
        amae = AdaptiveMovingAverage(dt=ekf.dt, **(amae_options or {})).fit()
        if smooth_full_state:
            smoothed = amae.transform(states, log.t)
            wind_amae = smoothed[:, WIND]
        else:
            wind_amae = amae.transform(states[:, WIND], log.t)
    derived = ekf.derived() if len(log) else {}
    return PipelineResult(log.t, states, states[:, WIND].copy(), wind_amae, derived, ekf)


@dataclass
class WindEstimateSeries:
    """Truth and per-method wind estimates on one time grid."""

    t: np.ndarray
    truth: np.ndarray
    estimates: dict = field(default_factory=dict)   # method name -> (N, 3) or None

    def components(self, method):
        wind = self.truth if method == "truth" else self.estimates[method]
        return wind_components(wind)

    def rmse(self, method, component, warmup=DEFAULT_WARMUP):
        return rmse(self.estimates[method], self.truth, component, self.t, warmup)

    def rmse_table(self, warmup=DEFAULT_WARMUP):
        """Dict ``{method: {component: rmse}}`` over the available methods."""
        return {m: {c: self.rmse(m, c, warmup) for c in COMPONENTS}
                for m in METHODS if self.estimates.get(m) is not None}

    def to_frame(self):
        cols = {"t": self.t}
        for name, wind in [("truth", self.truth)] + list(self.estimates.items()):
            if wind is None:
                continue
            tag = name.lower().replace("+", "_")
            for i, ax in enumerate(("wx", "wy", "wz")):
                cols[f"{tag}_{ax}"] = wind[:, i]
            for comp, val in wind_components(wind).items():
                cols[f"{tag}_{comp}"] = val
        return pd.DataFrame(cols)


# -- scenario experiments ---------------------------------------------------

@dataclass
class ExperimentSetup:
    """Everything needed to reproduce a run apart from the seed."""

    params: RigidBodyParams
    scenario: WindScenario = field(default_factory=WindScenario)
    truth_aero: AeroCoefficients = field(default_factory=AeroCoefficients)
    estimator_aero: AeroCoefficients | None = None
    sensors: SensorSpec = field(default_factory=lambda: enable_flow_vanes(SensorSpec()))
    ekf_options: dict = field(default_factory=dict)
    amae_options: dict = field(default_factory=dict)
    use_amae: bool = True
    smooth_full_state: bool = False
    duration: float = 90.0
    dt: float = 0.01
    airspeed: float = 16.8
    altitude: float = 50.0
    heading: float = 0.0

    def simulate(self, seed) -> SimulationResult:
        return simulate(self.scenario, self.params, self.truth_aero, self.sensors, self.duration,
                        self.dt, seed, self.airspeed, self.altitude, self.heading)

    def estimate(self, log, aero=None) -> PipelineResult:
        aero = aero if aero is not None else (self.estimator_aero or self.truth_aero)
        opts = {"dt": self.dt, "sensor_spec": self.sensors, **self.ekf_options}
        return estimate_log(log, self.params, aero, opts, self.amae_options, self.use_amae,
                            self.smooth_full_state)


@dataclass
class SeedRun:
    seed: int
    sim: SimulationResult
    pipeline: PipelineResult
    series: WindEstimateSeries


def _series(sim: SimulationResult, pipe: PipelineResult):
    try:
        direct = direct_wind_series(sim.log)
    except MissingFlowAngles:
        direct = None
    return WindEstimateSeries(sim.t, sim.wind, {"Calculation": direct, "EKF": pipe.wind_ekf,
                                                "EKF+AMAE": pipe.wind_amae})


def run_seed(setup: ExperimentSetup, seed) -> SeedRun:
    sim = setup.simulate(seed)
    pipe = setup.estimate(sim.log)
    return SeedRun(seed, sim, pipe, _series(sim, pipe))


def _seed_list(seeds):
    return list(range(seeds)) if isinstance(seeds, (int, np.integer)) else [int(s) for s in seeds]


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs == 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


@dataclass
class ScenarioReport:
    """
    Per-seed RMSE array plus the runs that produced it.

    ``rmse`` has shape ``(n_seeds, len(METHODS), len(COMPONENTS))``; missing
    methods are NaN.
    """

    scenario: str
    seeds: list
    warmup: float
    rmse: np.ndarray
    runs: list = field(default_factory=list, repr=False)

    def table(self):
        """Mean RMSE per method and component with the across-seed std."""
        rows = []
        for i, m in enumerate(METHODS):
            vals = self.rmse[:, i, :]
            if np.all(np.isnan(vals)):
                continue
            row = {"method": m}
            for j, c in enumerate(COMPONENTS):
                row[c] = float(np.mean(vals[:, j]))
                row[f"{c}_std"] = float(np.std(vals[:, j]))
            rows.append(row)
        return pd.DataFrame(rows)

    def mean(self, method, component):
        return float(np.mean(self.rmse[:, METHODS.index(method), COMPONENTS.index(component)]))


def _rmse_block(series: WindEstimateSeries, warmup):
    out = np.full((len(METHODS), len(COMPONENTS)), np.nan)
    for i, m in enumerate(METHODS):
        if series.estimates.get(m) is None:
            continue
        for j, c in enumerate(COMPONENTS):
            out[i, j] = series.rmse(m, c, warmup)
    return out


class _SeedWorker:
    def __init__(self, setup):
        self.setup = setup

    def __call__(self, seed):
        return run_seed(self.setup, seed)


def run_scenario(setup: ExperimentSetup, seeds=5, warmup=DEFAULT_WARMUP, keep_runs=True,
                 n_jobs=1) -> ScenarioReport:
    """
    Simulate ``setup`` once per seed and score direct calculation, EKF and
    EKF+AMAE against the true wind.
    """
    seeds = _seed_list(seeds)
    runs = _map(_SeedWorker(setup), seeds, n_jobs)
    block = np.array([_rmse_block(r.series, warmup) for r in runs]).reshape(
        len(seeds), len(METHODS), len(COMPONENTS))
    return ScenarioReport(setup.scenario.kind, seeds, warmup, block, runs if keep_runs else [])


# -- coefficient-error sweeps -----------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    param: str = "CL0"
    grid: tuple = (-0.15, -0.12, -0.09, -0.06, -0.03, 0.0, 0.03, 0.06, 0.09, 0.12, 0.15)

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"sweep parameter must be one of CL0, CLalpha, CD0; got {self.param!r}")
        object.__setattr__(self, "param", SWEEP_PARAMS[self.param])
        grid = tuple(float(g) for g in self.grid)
        if not any(g == 0.0 for g in grid):
            raise ValueError("sweep grid must include 0 (the baseline run)")
        object.__setattr__(self, "grid", grid)


SWEEP_COLUMNS = ("delta", "alpha_deg", "CL", "CD") + COMPONENTS


@dataclass
class SweepReport:
    spec: SweepSpec
    seeds: list
    warmup: float
    values: np.ndarray          # (n_seeds, n_grid, len(SWEEP_COLUMNS) - 1)
    reference: dict             # truth-side mean alpha_deg, CL, CD

    def table(self):
        mean = self.values.mean(axis=0)
        std = self.values.std(axis=0)
        df = pd.DataFrame(mean, columns=SWEEP_COLUMNS[1:])
        for j, c in enumerate(COMPONENTS):
            df[f"{c}_std"] = std[:, 3 + j]
        df.insert(0, "delta", self.spec.grid)
        df.insert(0, "param", self.spec.param)
        return df

    def column(self, name):
        return self.values.mean(axis=0)[:, SWEEP_COLUMNS.index(name) - 1]

    def row(self, delta):
        return self.values.mean(axis=0)[self.spec.grid.index(float(delta))]


def _truth_reference(sim: SimulationResult, mask, params, aero):
    """Mean true angle of attack (deg), lift and drag coefficient."""
    ft = flight_terms(sim.v_body, sim.omega, sim.eta, sim.controls.T, params, aero)
    coeffs = ft.coeffs[mask]
    return np.array([np.degrees(ft.flow.alpha[mask]).mean(), coeffs[:, 2].mean(), coeffs[:, 0].mean()])


class _SweepWorker:
    def __init__(self, setup, spec, warmup):
        self.setup, self.spec, self.warmup = setup, spec, warmup

    def __call__(self, seed):
        setup, spec = self.setup, self.spec
        sim = setup.simulate(seed)
        mask = sim.t >= self.warmup - 1e-9
        ref = _truth_reference(sim, mask, setup.params, setup.truth_aero)
        base = setup.estimator_aero or setup.truth_aero
        method = "EKF+AMAE" if setup.use_amae else "EKF"
        rows = []
        for delta in spec.grid:
            aero = apply_perturbation(base, {spec.param: delta})
            pipe = setup.estimate(sim.log, aero)
            series = _series(sim, pipe)
            d = pipe.derived
            rows.append([np.degrees(d["alpha"][mask]).mean(), d["CL"][mask].mean(), d["CD"][mask].mean()]
                        + [series.rmse(method, c, self.warmup) for c in COMPONENTS])
        return np.array(rows), ref


def run_sweep(setup: ExperimentSetup, spec: SweepSpec, seeds=5, warmup=DEFAULT_WARMUP,
              n_jobs=1) -> SweepReport:
    """
    Estimator-model error sweep: the truth simulation is fixed per seed and
    only the estimator's coefficient ``spec.param`` is offset by each grid
    value. RMSEs are for the smoothed estimate (raw EKF when AMAE is off).
    """
    seeds = _seed_list(seeds)
    results = _map(_SweepWorker(setup, spec, warmup), seeds, n_jobs)
    values = np.array([r[0] for r in results])
    ref = np.mean([r[1] for r in results], axis=0)
    reference = dict(zip(("alpha_deg", "CL", "CD"), ref.tolist()))
    return SweepReport(spec, seeds, warmup, values, reference)


def with_noise_free_sensors(setup: ExperimentSetup) -> ExperimentSetup:
    return dataclasses.replace(setup, sensors=setup.sensors.noise_free())
