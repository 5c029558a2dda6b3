"""
Wind estimation experiments for a small fixed-wing UAV.

    aerowind simulate --scenario steady --seed 7 --out run1
    aerowind sweep --param CL0 --grid -0.15,0,0.15
    aerowind replay --log flight.csv
    aerowind bench

Every run directory receives ``config.yaml``, the effective configuration,
from which the run can be reproduced. Without ``--out`` runs go under
``$AEROWIND_OUTPUT_ROOT`` (default ``./runs``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import pandas as pd

from .config import example_config_path, load_config
from .csvio import estimates_to_frame, read_log, truth_to_frame, write_csv, write_log
from .evaluation import SWEEP_PARAMS, ExperimentSetup, SweepSpec, run_scenario, run_sweep
from .exceptions import AeroWindError, ConfigError, UsageError
from .harness import benchmark, replay
from .simulation import simulate
from .wind import SCENARIOS, WindScenario

OUTPUT_ROOT_ENV = "AEROWIND_OUTPUT_ROOT"
EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("aerowind")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n\n{self.format_usage()}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="YAML run configuration (default: bundled example)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--scenario", help=f"wind scenario: {', '.join(SCENARIOS)}")
    common.add_argument("--seed", type=int, help="first random seed")
    common.add_argument("--seeds", type=int, help="number of seeds to average")
    common.add_argument("--warmup", type=float, metavar="SECONDS",
                        help="samples before this time are excluded from RMSE")
    common.add_argument("--no-amae", action="store_true", help="disable the adaptive smoother")
    common.add_argument("--jobs", type=int, help="worker processes for seeds / grid points")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="aerowind", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="simulate, estimate and score one scenario")
    sw = sub.add_parser("sweep", parents=[common], help="estimator coefficient-error sweep")
    sw.add_argument("--param", help="coefficient to perturb: CL0, CLalpha or CD0")
    sw.add_argument("--grid", help="comma-separated deltas, must include 0")
    rp = sub.add_parser("replay", parents=[common], help="run the estimator over a CSV flight log")
    rp.add_argument("--log", metavar="PATH", help="flight log CSV")
    rp.add_argument("--gnss", choices=("interpolate", "mask"),
                    help="interpolate GNSS onto every tick (default) or keep the log's gaps")
    rp.add_argument("--constant-throttle", type=float, metavar="DELTA_P",
                    help="throttle to assume when the log has no delta_p column")
    bn = sub.add_parser("bench", parents=[common], help="time the estimator")
    bn.add_argument("--log", metavar="PATH", help="flight log CSV (default: simulated data)")
    bn.add_argument("--duration", type=float, metavar="SECONDS",
                    help="length of simulated data when no log is given")
    return parser


def _load(args):
    path = args.config or example_config_path()
    cfg = load_config(path)
    ev = cfg.raw["evaluation"]
    if args.scenario is not None:
        if args.scenario not in SCENARIOS:
            raise UsageError(f"unknown scenario '{args.scenario}'; valid: {', '.join(SCENARIOS)}")
        cfg.raw["wind"]["scenario"] = args.scenario
        cfg.scenario = WindScenario(args.scenario, {}, cfg.scenario.turbulence)
        cfg.raw["wind"]["params"] = {}
    for key in ("seed", "seeds", "warmup"):
        if getattr(args, key) is not None:
            ev[key] = getattr(args, key)
    if args.jobs is not None:
        ev["n_jobs"] = args.jobs
    if args.seeds is not None and args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    if args.no_amae:
        cfg.raw["amae"]["enabled"] = False
        cfg.use_amae = False
    return cfg


def _outdir(args, cfg, name):
    if args.out:
        out = Path(args.out)
    elif cfg.raw["output"]["dir"]:
        out = Path(cfg.raw["output"]["dir"])
    else:
        out = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / name
    out.mkdir(parents=True, exist_ok=True)
    cfg.raw["output"]["dir"] = str(out)
    return out


def _seeds(cfg):
    ev = cfg.evaluation
    return list(range(ev["seed"], ev["seed"] + ev["seeds"]))


def cmd_simulate(args, cfg):
    ev = cfg.evaluation
    out = _outdir(args, cfg, f"simulate-{cfg.scenario.kind}-seed{ev['seed']}")
    setup = cfg.experiment()
    report = run_scenario(setup, _seeds(cfg), ev["warmup"], n_jobs=ev["n_jobs"])
    first = report.runs[0]
    write_csv(truth_to_frame(first.sim), out / "truth.csv")
    write_log(first.sim.log, out / "measurements.csv")
    write_csv(estimates_to_frame(first.pipeline, first.series.estimates["Calculation"]),
              out / "estimates.csv")
    write_csv(first.series.to_frame(), out / "series.csv")
    table = report.table()
    table.insert(0, "scenario", cfg.scenario.kind)
    table["seeds"] = len(report.seeds)
    table["warmup_s"] = ev["warmup"]
    write_csv(table, out / "report.csv")
    cfg.write_echo(out)
    print(table.to_string(index=False))
    return out


def _parse_grid(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"--grid must be comma-separated numbers: {exc}") from exc


def cmd_sweep(args, cfg):
    sw = cfg.raw["sweep"]
    param = args.param if args.param is not None else sw["param"]
    if param not in SWEEP_PARAMS:
        raise UsageError(f"unknown --param '{param}'; valid: CL0, CLalpha, CD0")
    if args.grid:
        grid = _parse_grid(args.grid)
    elif sw["grid"] is not None and args.param is None:
        grid = tuple(float(g) for g in sw["grid"])
    else:
        grid = SweepSpec(param).grid
    if 0.0 not in grid:
        raise UsageError("--grid must include 0 (the baseline run)")
    spec = SweepSpec(param, grid)
    ev = cfg.evaluation
    out = _outdir(args, cfg, f"sweep-{spec.param}")
    cfg.raw["sweep"] = {"param": spec.param, "grid": list(spec.grid)}
    rep = run_sweep(cfg.experiment(), spec, _seeds(cfg), ev["warmup"], n_jobs=ev["n_jobs"])
    table = rep.table()
    for k, v in rep.reference.items():
        table[f"true_{k}"] = v
    table["seeds"] = len(rep.seeds)
    table["warmup_s"] = ev["warmup"]
    write_csv(table, out / "report.csv")
    cfg.write_echo(out)
    print(table.to_string(index=False))
    return out


def cmd_replay(args, cfg):
    rp = cfg.raw["replay"]
    if args.log:
        rp["log"] = str(args.log)
    if not rp["log"]:
        raise UsageError("replay needs --log PATH")
    if args.gnss:
        rp["gnss"] = args.gnss
    if args.constant_throttle is not None:
        rp["constant_throttle"] = args.constant_throttle
    data = read_log(rp["log"], rp["constant_throttle"])
    out = _outdir(args, cfg, f"replay-{Path(rp['log']).stem}")
    res = replay(data, cfg, gnss=rp["gnss"])
    write_csv(estimates_to_frame(res.pipeline, res.direct), out / "estimates.csv")
    write_csv(res.report, out / "report.csv")
    cfg.write_echo(out)
    print(res.report.to_string(index=False))
    return out


def cmd_bench(args, cfg):
    setup: ExperimentSetup = cfg.experiment()
    if args.duration is not None:
        cfg.raw["bench"]["duration"] = args.duration
    duration = cfg.raw["bench"]["duration"]
    if args.log:
        data = read_log(args.log, cfg.raw["replay"]["constant_throttle"])
    else:
        # n samples at 100 Hz cover n * dt seconds of data
        n = int(round(duration / setup.dt))
        data = simulate(setup.scenario, setup.params, setup.truth_aero, setup.sensors,
                        max(n - 1, 0) * setup.dt, setup.dt, cfg.evaluation["seed"]).log[0:n]
    opts = {"dt": setup.dt, "sensor_spec": setup.sensors, **setup.ekf_options}
    rep = benchmark(data, setup.params, setup.estimator_aero, opts, setup.amae_options, cfg.use_amae)
    table = rep.as_frame()
    if args.out or cfg.raw["output"]["dir"]:
        out = _outdir(args, cfg, "bench")
        write_csv(table, out / "bench.csv")
        cfg.write_echo(out)
    print(f"{rep.steps} steps ({rep.duration:.2f} s of data) in {rep.wall_time:.3f} s wall, "
          f"{rep.realtime_factor:.1f}x real time; per step: predict {rep.predict_us:.0f} us, "
          f"update {rep.update_us:.0f} us, AMAE {rep.amae_us:.0f} us")
    return rep


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "replay": cmd_replay, "bench": cmd_bench}


def _join_negative_values(argv):
    # "--grid -0.15,0,0.15" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--grid", "--warmup"):
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
        if args.command is None:
            raise UsageError(f"a subcommand is required: {', '.join(COMMANDS)}\n\n"
                             f"{parser.format_usage()}")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = _load(args)
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AeroWindError, OSError, ValueError, pd.errors.ParserError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
