"""Batch command-line front end.

Subcommands:

* ``simulate``  one design, one (deterministic) noise draw -> dense
  trajectory CSV plus a scored report JSON;
* ``optimize``  swarm search for the configured case -> best design
  JSON, convergence CSV, result JSON;
* ``validate``  repeated noisy simulation of a design -> per-run and
  aggregate CSVs;
* ``catalog check``  validate a motor catalog file.

Configuration is a flat JSON object (see DEFAULT_CONFIG); physical
quantities are SI except the touchdown angle (degrees) and leg rotation
rate (rev/s), matching the design-file convention. Exit codes: 1 for
configuration problems, 2 for validation problems (bad design or data
files), 3 for runtime failures. Output files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .catalog import CatalogError, default_catalog_path, load_catalog
from .evaluation import (
    NOISE_STD_DEG,
    Evaluator,
    NoiseSpec,
    design_search_space,
    evaluate,
    perturb_touchdown,
    summarize,
    validate_monte_carlo,
    _residuals,
    net_violation,
    objective_case1,
    objective_case2,
    EvalReport,
)
from .model import BoundsError, DesignVector, build_system
from .mdpso import SwarmConfig, optimize
from .sim import FLIGHT, STANCE, SimConfig, Trajectory, resample, simulate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

DEFAULT_CONFIG: dict = {
    "case_id": 1,
    "catalog_path": None,  # null -> packaged catalog
    # integrator
    "rel_tol": 1e-6,
    "abs_tol": 1e-9,
    "max_cycles": 25,  # simulate / validate
    "opt_max_cycles": 10,  # optimize: enough margin over the 8-cycle constraint
    "t_max": 20.0,
    "event_tol": 1e-10,
    # swarm
    "population": 128,
    "inertia": 0.729,
    "cognitive": 1.49445,
    "social": 1.49445,
    "velocity_clamp": 0.5,
    "max_iterations": 200,
    "stall_infeasible": 15,
    "stall_feasible": 5,
    # randomness
    "seed": 0,
    "noise_seed": None,  # null -> same as seed
    "noise_std_deg": NOISE_STD_DEG,
    "noise_redraw": "per_iteration",  # or per_particle: one fixed draw per slot
    # execution
    "workers": 1,
    "out_dir": "tdslip_out",
}


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, header: list[str], rows) -> None:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write(path, buf.getvalue())


def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise CliError(f"config file not found: {p}", EXIT_CONFIG)
        try:
            user = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"config file is not valid JSON: {exc}", EXIT_CONFIG)
        if not isinstance(user, dict):
            raise CliError("config file must hold a flat JSON object", EXIT_CONFIG)
        unknown = sorted(set(user) - set(DEFAULT_CONFIG))
        if unknown:
            raise CliError(f"unknown config keys: {unknown}", EXIT_CONFIG)
        cfg.update(user)
    if cfg["case_id"] not in (1, 2):
        raise CliError(f"case_id must be 1 or 2, got {cfg['case_id']}", EXIT_CONFIG)
    if cfg["noise_seed"] is None:
        cfg["noise_seed"] = cfg["seed"]
    return cfg


def _load_catalog_from_config(cfg: dict):
    path = cfg["catalog_path"] or default_catalog_path()
    try:
        return load_catalog(path)
    except CatalogError as exc:
        code = EXIT_CONFIG if "not found" in str(exc) else EXIT_VALIDATION
        raise CliError(f"catalog error: {exc}", code)


def _load_design(path: str) -> DesignVector:
    p = Path(path)
    if not p.exists():
        raise CliError(f"design file not found: {p}", EXIT_VALIDATION)
    try:
        design = DesignVector.from_json(p)
        design.validate()
    except (json.JSONDecodeError, ValueError) as exc:
        raise CliError(f"invalid design file {p}: {exc}", EXIT_VALIDATION)
    return design


def _sim_config(cfg: dict) -> SimConfig:
    return SimConfig(rel_tol=float(cfg["rel_tol"]), abs_tol=float(cfg["abs_tol"]),
                     max_cycles=int(cfg["max_cycles"]), t_max=float(cfg["t_max"]),
                     event_tol=float(cfg["event_tol"]))


def _noise(cfg: dict) -> NoiseSpec:
    return NoiseSpec(epsilon=math.radians(float(cfg["noise_std_deg"])), seed=int(cfg["noise_seed"]))


def _trajectory_rows(traj: Trajectory, l_0: float, dt: float):
    dense = resample(traj, dt)
    for seg in dense.segments:
        x, y, xd, yd = seg.xy_view()
        for i in range(len(seg.t)):
            if seg.kind == STANCE:
                theta = seg.states[i, 0]
                zeta = seg.states[i, 2]
                i_a = seg.states[i, 4]
            else:
                theta = seg.states[i, 4]
                zeta = l_0
                i_a = seg.states[i, 6]
            yield (f"{seg.t[i]:.9f}", seg.kind, f"{x[i]:.9g}", f"{y[i]:.9g}",
                   f"{xd[i]:.9g}", f"{yd[i]:.9g}", f"{theta:.9g}", f"{zeta:.9g}",
                   f"{i_a:.9g}", f"{seg.V[i]:.9g}")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    catalog = _load_catalog_from_config(cfg)
    design = _load_design(args.design)
    out = Path(args.out or cfg["out_dir"])
    try:
        params = build_system(design, catalog)
    except (BoundsError, CatalogError) as exc:
        raise CliError(f"design rejected: {exc}", EXIT_VALIDATION)

    noise = _noise(cfg)
    sim_cfg = _sim_config(cfg)
    case_id = int(args.case or cfg["case_id"])
    theta_td1 = perturb_touchdown(params.theta_0, noise, 0)
    traj = simulate(params, design, theta_td1, sim_cfg)
    if not traj.segments:
        raise CliError(f"simulation failed: {traj.termination}", EXIT_RUNTIME)
    summary = summarize(traj, params)
    g = _residuals(summary, params, case_id)
    report = EvalReport(
        objective=(objective_case1(summary, params) if case_id == 1
                   else objective_case2(summary, params)),
        g=g,
        feasible=all(v <= 0.0 for v in g.values()),
        net_violation=net_violation(g, params, case_id),
        summary=summary,
        theta_TD1=theta_td1,
        theta_TD2=summary.theta_td2,
        F=summary.energy_cycle1,
        n_cycles=traj.n_cycles,
        case_id=case_id,
        termination=traj.termination,
    )

    header = ["t", "phase", "x", "y", "x_dot", "y_dot", "theta", "zeta", "i_a", "V"]
    _write_csv(out / "trajectory.csv", header, _trajectory_rows(traj, params.l_0, args.dt))
    _atomic_write(out / "report.json", json.dumps(report.to_json_dict(), indent=2) + "\n")
    print(f"simulate: termination={traj.termination} cycles={traj.n_cycles} "
          f"feasible={report.feasible} -> {out}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    catalog = _load_catalog_from_config(cfg)
    out = Path(args.out or cfg["out_dir"])
    case_id = int(args.case or cfg["case_id"])
    seed = int(args.seed if args.seed is not None else cfg["seed"])
    workers = int(args.workers or cfg["workers"])

    noise = NoiseSpec(epsilon=math.radians(float(cfg["noise_std_deg"])),
                      seed=int(cfg["noise_seed"]) if args.seed is None else seed)
    if cfg["noise_redraw"] not in ("per_iteration", "per_particle"):
        raise CliError(f"noise_redraw must be per_iteration or per_particle, "
                       f"got {cfg['noise_redraw']!r}", EXIT_CONFIG)
    opt_sim = _sim_config(cfg)
    opt_sim = SimConfig(rel_tol=opt_sim.rel_tol, abs_tol=opt_sim.abs_tol,
                        max_cycles=int(cfg["opt_max_cycles"]), t_max=opt_sim.t_max,
                        event_tol=opt_sim.event_tol)
    evaluator = Evaluator(case_id=case_id, noise=noise, catalog=catalog,
                          sim_config=opt_sim, draw_policy=str(cfg["noise_redraw"]))
    swarm = SwarmConfig(
        population=int(cfg["population"]), inertia=float(cfg["inertia"]),
        cognitive=float(cfg["cognitive"]), social=float(cfg["social"]),
        velocity_clamp=float(cfg["velocity_clamp"]), max_iterations=int(cfg["max_iterations"]),
        stall_infeasible=int(cfg["stall_infeasible"]), stall_feasible=int(cfg["stall_feasible"]),
        seed=seed,
    )

    def progress(stats):
        if not args.quiet:
            print(f"  iter {stats.iteration:4d}  best_feasible="
                  f"{stats.best_feasible_objective:.6g}  min_violation="
                  f"{stats.min_net_violation:.6g}  n_feasible={stats.n_feasible}")

    result = optimize(design_search_space(), evaluator, swarm, workers=workers,
                      on_iteration=progress)

    best_design = DesignVector.from_array(result.best_position).clamped()
    _atomic_write(out / "best_design.json", json.dumps(best_design.to_dict(), indent=2) + "\n")
    _write_csv(out / "convergence.csv",
               ["iteration", "best_feasible_objective", "min_net_violation", "n_feasible"],
               [(h.iteration,
                 "" if math.isnan(h.best_feasible_objective) else f"{h.best_feasible_objective:.12g}",
                 f"{h.min_net_violation:.12g}" if math.isfinite(h.min_net_violation) else "inf",
                 h.n_feasible) for h in result.history])
    best_report = result.best_fitness.to_json_dict() if isinstance(result.best_fitness, EvalReport) else None
    _atomic_write(out / "result.json", json.dumps({
        "case_id": case_id,
        "seed": seed,
        "workers": workers,
        "iterations": result.iterations,
        "termination_reason": result.termination_reason,
        "feasible": result.feasible,
        "best_report": best_report,
    }, indent=2) + "\n")
    print(f"optimize: case {case_id} finished after {result.iterations} iterations "
          f"({result.termination_reason}), feasible={result.feasible} -> {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    catalog = _load_catalog_from_config(cfg)
    design = _load_design(args.design)
    out = Path(args.out or cfg["out_dir"])
    if args.n < 1:
        raise CliError(f"validation requires n >= 1, got {args.n}", EXIT_CONFIG)
    case_id = int(args.case or cfg["case_id"])
    workers = int(args.workers or cfg["workers"])
    try:
        stats = validate_monte_carlo(design, case_id, args.n, _noise(cfg), catalog,
                                     _sim_config(cfg), workers=workers)
    except BoundsError as exc:
        raise CliError(f"design rejected: {exc}", EXIT_VALIDATION)

    def fmt(v: float) -> str:
        return "" if (isinstance(v, float) and math.isnan(v)) else f"{v:.12g}"

    _write_csv(out / "validation_runs.csv",
               ["run", "noise_rad", "theta_diff_deg", "n_cycles", "energy_J"],
               [(i, f"{stats.noise_rad[i]:.17g}", fmt(float(stats.theta_diff_deg[i])),
                 int(stats.n_cycles[i]), fmt(float(stats.energy_J[i])))
                for i in range(stats.n)])
    agg = stats.aggregates()
    rows = []
    for metric in ("theta_diff_deg", "n_cycles", "energy_J"):
        m = agg[metric]
        rows.append((metric, m["mean"], m["std"], m["max"], m["count"]))
    _write_csv(out / "validation_aggregate.csv", ["metric", "mean", "std", "max", "count"], rows)
    _atomic_write(out / "validation_summary.json", json.dumps(agg, indent=2) + "\n")
    print(f"validate: {stats.n} runs, mean cycles "
          f"{agg['n_cycles']['mean']:.2f}, feasible fraction {agg['feasible_fraction']:.2f} -> {out}")
    return EXIT_OK


def cmd_catalog_check(args) -> int:
    path = Path(args.catalog) if args.catalog else default_catalog_path()
    if not path.exists():
        raise CliError(f"catalog file not found: {path}", EXIT_CONFIG)
    try:
        catalog = load_catalog(path)
    except CatalogError as exc:
        raise CliError(f"catalog invalid: {exc}", EXIT_VALIDATION)
    print(f"catalog OK: {len(catalog)} motor options from {path}")
    for m in catalog:
        print(f"  {m.label:2d}  {m.part_name:<28s} d={m.diameter_mm:g}mm R={m.R:g} "
              f"mass={1e3 * m.mass_kg:.1f}g")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdslip",
                                     description="TD-SLIP hopper simulation and co-design")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate one design and export its trajectory")
    p_sim.add_argument("--config", default=None, help="run configuration JSON")
    p_sim.add_argument("--design", required=True, help="design vector JSON")
    p_sim.add_argument("--case", type=int, choices=(1, 2), default=None)
    p_sim.add_argument("--out", default=None, help="output directory")
    p_sim.add_argument("--dt", type=float, default=1e-3, help="trajectory CSV sample step [s]")
    p_sim.set_defaults(func=cmd_simulate)

    p_opt = sub.add_parser("optimize", help="run the swarm co-design search")
    p_opt.add_argument("--config", default=None)
    p_opt.add_argument("--case", type=int, choices=(1, 2), default=None)
    p_opt.add_argument("--seed", type=int, default=None)
    p_opt.add_argument("--workers", type=int, default=None)
    p_opt.add_argument("--out", default=None)
    p_opt.add_argument("--quiet", action="store_true")
    p_opt.set_defaults(func=cmd_optimize)

    p_val = sub.add_parser("validate", help="repeated noisy simulation of one design")
    p_val.add_argument("--config", default=None)
    p_val.add_argument("--design", required=True)
    p_val.add_argument("-n", type=int, default=100, help="number of noisy runs")
    p_val.add_argument("--case", type=int, choices=(1, 2), default=None)
    p_val.add_argument("--workers", type=int, default=None)
    p_val.add_argument("--out", default=None)
    p_val.set_defaults(func=cmd_validate)

    p_cat = sub.add_parser("catalog", help="catalog utilities")
    cat_sub = p_cat.add_subparsers(dest="catalog_command", required=True)
    p_check = cat_sub.add_parser("check", help="validate a catalog CSV")
    p_check.add_argument("--catalog", default=None, help="catalog CSV path (default: packaged)")
    p_check.set_defaults(func=cmd_catalog_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # unexpected runtime failure
        print(f"runtime error: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
