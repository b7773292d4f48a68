"""Command-line front end: one subcommand per experiment plus field-level tools."""
import argparse
import json
import logging
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from bbm_lab.compiler import EXIT_ERROR, EXIT_OK
from bbm_lab.config import ExperimentName, configure_logging, load_config, load_settings
from bbm_lab.errors import LabError
from bbm_lab.initial_data import DataFamily, DataFamilySpec, make_data
from bbm_lab.picard import Trajectory, i2_closed_form, i2_duhamel
from bbm_lab.solver import SolverConfig, evolve, invariant_h1, invariant_mean, residual_ivp1
from bbm_lab.spectral import GridMode, hs_norm, l2_norm, relative_l2, to_physical
from bbm_lab.textio import dump_field, dump_samples

log = logging.getLogger(__name__)

EXPERIMENT_COMMANDS = {name.value.replace("_", "-"): name for name in ExperimentName}


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--M", type=int, help="half number of frequency nodes")
    p.add_argument("--delta-xi", type=float, help="frequency spacing")
    p.add_argument("--mode", choices=[m.value for m in GridMode])


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (flags override its values)")
    p.add_argument("--N", type=float, nargs="+", dest="N_list")
    p.add_argument("--s", type=float, nargs="+", dest="s_list")
    p.add_argument("--t", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--family", choices=[f.value for f in DataFamily])
    p.add_argument("--sigma", type=float)
    p.add_argument("--width", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--Q", type=int)
    p.add_argument("--refine", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--output-dir")
    _grid_flags(p)


def _overrides(args: argparse.Namespace) -> dict:
    """Nested config overrides from the flags that were actually given."""
    return {
        "N_list": getattr(args, "N_list", None),
        "s_list": getattr(args, "s_list", None),
        "t": getattr(args, "t", None),
        "eps": getattr(args, "eps", None),
        "family": getattr(args, "family", None),
        "sigma": getattr(args, "sigma", None),
        "width": getattr(args, "width", None),
        "amplitude": getattr(args, "amplitude", None),
        "K": getattr(args, "K", None),
        "output_dir": getattr(args, "output_dir", None),
        "grid": {"M": args.M, "delta_xi": args.delta_xi, "mode": args.mode},
        "quadrature": {"Q": getattr(args, "Q", None), "refine": getattr(args, "refine", None)},
        "solver": {"dt": getattr(args, "dt", None)},
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbm-lab", description="Norm inflation experiments for the BBM equation")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for command, name in EXPERIMENT_COMMANDS.items():
        _experiment_flags(sub.add_parser(command, help=f"run the {name.value} sweep"))

    p = sub.add_parser("all", help="run every experiment with its defaults")
    p.add_argument("--config", help="JSON file mapping experiment name to config overrides")
    p.add_argument("--skip", nargs="*", default=[], help="experiments to leave out")

    p = sub.add_parser("data", help="dump the spectrum of one data family member")
    p.add_argument("--family", choices=[f.value for f in DataFamily], default=DataFamily.SHARP.value)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--s", type=float, default=-0.5)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--width", type=int, default=1)
    p.add_argument("--out", help="spectrum dump path")
    p.add_argument("--samples", help="physical-space samples dump path")
    _grid_flags(p)

    p = sub.add_parser("i2", help="second Picard iterate of one data family member")
    p.add_argument("--family", choices=[f.value for f in DataFamily], default=DataFamily.SHARP.value)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--s", type=float, default=-0.5)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--method", choices=["closed", "duhamel", "both"], default="both")
    p.add_argument("--Q", type=int, default=256)
    p.add_argument("--refine", type=int, default=1)
    p.add_argument("--out", help="spectrum dump path")
    _grid_flags(p)

    p = sub.add_parser("evolve", help="RK4 evolution of eps times a data family member")
    p.add_argument("--family", choices=[f.value for f in DataFamily], default=DataFamily.SHARP.value)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--s", type=float, default=-0.5)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--checkpoints", type=int, default=5)
    p.add_argument("--dump-dir", help="write a spectrum dump per checkpoint")
    _grid_flags(p)
    return parser


def _single_field_config(experiment: ExperimentName, args: argparse.Namespace):
    overrides = {
        "N_list": [args.N],
        "family": args.family,
        "sigma": getattr(args, "sigma", None),
        "width": getattr(args, "width", None),
        "grid": {"M": args.M, "delta_xi": args.delta_xi, "mode": args.mode},
    }
    if args.mode == GridMode.PERIODIC.value:
        overrides.pop("family")
    return load_config(experiment, overrides=overrides)


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2, default=float))


def _cmd_data(args) -> int:
    cfg = _single_field_config(ExperimentName.DATA_NORMS, args)
    grid = cfg.make_grid()
    h = make_data(DataFamilySpec(family=cfg.family, N=args.N, s=args.s, sigma=cfg.sigma, width=cfg.width), grid)
    if args.out:
        dump_field(h, args.out)
    if args.samples:
        x, values = to_physical(h)
        dump_samples(x, values, args.samples)
    _emit({"N": args.N, "s": args.s, "family": cfg.family.value, "l2": l2_norm(h), "hs": hs_norm(h, args.s),
           "nodes": grid.size})
    return EXIT_OK


def _cmd_i2(args) -> int:
    cfg = _single_field_config(ExperimentName.I2_INFLATION, args)
    grid = cfg.make_grid()
    h = make_data(DataFamilySpec(family=cfg.family, N=args.N, s=args.s, sigma=cfg.sigma, width=cfg.width), grid)
    payload = {"N": args.N, "t": args.t, "s": args.s}
    fields = {}
    if args.method in ("closed", "both"):
        fields["closed"] = i2_closed_form(h, args.t, args.refine, cfg.support_rtol)
    if args.method in ("duhamel", "both"):
        fields["duhamel"] = i2_duhamel(h, args.t, args.Q, cfg.support_rtol)
    for method, field in fields.items():
        payload[f"hs_{method}"] = hs_norm(field, args.s)
    payload["hs_norm_I2"] = payload.get("hs_closed", payload.get("hs_duhamel"))
    payload["method_discrepancy"] = relative_l2(fields["duhamel"], fields["closed"]) if len(fields) == 2 else None
    if args.out:
        dump_field(next(iter(fields.values())), args.out)
    _emit(payload)
    return EXIT_OK


def _cmd_evolve(args) -> int:
    cfg = _single_field_config(ExperimentName.DISCONTINUITY, args)
    grid = cfg.make_grid()
    h = make_data(DataFamilySpec(family=cfg.family, N=args.N, s=args.s, sigma=cfg.sigma, width=cfg.width), grid)
    u0 = args.eps * h
    solver_cfg = SolverConfig.for_time(args.t, args.dt, support_rtol=cfg.support_rtol)
    traj = evolve(u0, solver_cfg)

    marks = np.unique(np.linspace(0, traj.Q, max(1, args.checkpoints) + 1).round().astype(int))
    mean0, h10 = invariant_mean(u0), invariant_h1(u0)
    report = []
    for a, b in zip(marks, marks[1:]):
        u = traj.field(b)
        window = Trajectory(grid, traj.times[a: b + 1] - traj.times[a], traj.coeffs[a: b + 1])
        entry = {
            "t": float(traj.times[b]),
            "l2": l2_norm(u),
            "hs": hs_norm(u, args.s),
            "mean_drift": abs(invariant_mean(u) - mean0),
            "h1_drift": abs(invariant_h1(u) - h10) / h10 if h10 else 0.0,
            "residual": residual_ivp1(window, cfg.support_rtol) if b - a >= 4 else None,
        }
        report.append(entry)
        if args.dump_dir:
            os.makedirs(args.dump_dir, exist_ok=True)
            dump_field(u, os.path.join(args.dump_dir, f"u_t{entry['t']:.6f}.txt"))
    _emit(report)
    return EXIT_OK


def _run_experiments(configs: dict) -> int:
    from bbm_lab.graph import run_sweep

    settings = load_settings()
    start = time.time()
    state = run_sweep(configs, settings)
    compiled = state.get("compiled", {})
    log.info("Sweep complete in %.1fs", time.time() - start)
    for name in sorted(compiled.get("experiments_completed", [])):
        log.info("  [OK] %s", name)
    for failure in compiled.get("failed_checks", []):
        log.error("  [FAIL] %s", failure)
    for error in compiled.get("experiments_failed", []):
        log.error("  [FAIL] %s", error)
    if compiled.get("report_path"):
        log.info(">> Report: %s", os.path.abspath(compiled["report_path"]))
    return compiled.get("exit_code", EXIT_ERROR)


def _cmd_experiment(args) -> int:
    name = EXPERIMENT_COMMANDS[args.command]
    cfg = load_config(name, args.config, _overrides(args))
    return _run_experiments({name.value: cfg})


def _cmd_all(args) -> int:
    per_experiment = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as f:
                per_experiment = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise LabError(f"cannot read config {args.config}: {e}") from e
    skip = {s.replace("-", "_") for s in args.skip}
    configs = {
        name.value: load_config(name, overrides=per_experiment.get(name.value, {}))
        for name in ExperimentName if name.value not in skip
    }
    return _run_experiments(configs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings()
        configure_logging("DEBUG" if args.verbose else settings.log_level)
        if args.command in EXPERIMENT_COMMANDS:
            return _cmd_experiment(args)
        handler = {"all": _cmd_all, "data": _cmd_data, "i2": _cmd_i2, "evolve": _cmd_evolve}[args.command]
        return handler(args)
    except (LabError, ValueError) as e:
        log.error("[FAIL] %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
