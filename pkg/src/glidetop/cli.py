"""Command-line front end: ``run``, ``sweep`` and ``check``.

Exit codes: 0 success, 1 a check suite failed, 2 bad configuration or
arguments, 3 the run ended on a degenerate reaction-force denominator.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import checks
from .analysis import classify_stability, detect_convergence, max_tilt
from .config import RunConfig, load_run, load_sweep
from .dynamics import vector_to_euler, vertical_tip_velocity
from .errors import ChartSingularity, ConfigError, DegenerateDenominator, GlideTopError
from .integrator import integrate
from .state import VectorState
from .trajectory import TerminationKind, Trajectory

SCHEMA_VERSION = 1
CSV_HEADER = ("t", "theta", "phidot", "omega3", "nux", "nuy",
              "E", "gn", "L3", "Lz", "LAz", "vA")
SWEEP_HEADER = ("index", "LA3", "predicted_upright_stable", "observed_limit",
                "t_converged", "termination", "max_tilt", "error")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def fmt(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


def _json_default(x):
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# artifacts


def trajectory_rows(traj: Trajectory) -> list[list[str]]:
    params = traj.params
    cols = {name: traj.column(name) for name in ("energy", "gn", "L3", "Lz", "LAz", "vA_norm")}
    rows = []
    for i, y in enumerate(traj.y):
        try:
            es, _ = vector_to_euler(VectorState.from_array(y), params)
            euler = [fmt(es.theta), fmt(es.phidot), fmt(es.omega3), fmt(es.nux), fmt(es.nuy)]
        except ChartSingularity:
            euler = [""] * 5
        rows.append([fmt(traj.t[i]), *euler,
                     *(fmt(cols[k][i]) for k in ("energy", "gn", "L3", "Lz", "LAz", "vA_norm"))])
    return rows


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(trajectory_rows(traj))


def drifts(traj: Trajectory) -> dict:
    L3 = traj.column("L3")
    E = traj.energy
    vAz = max(abs(vertical_tip_velocity(VectorState.from_array(y), traj.params)) for y in traj.y)
    return {
        "L3_abs": float(np.max(np.abs(L3 - L3[0]))),
        "max_energy_increase": float(max(0.0, np.max(np.diff(E)))) if len(E) > 1 else 0.0,
        "energy_rel": float(np.max(np.abs(E - E[0])) / abs(E[0])) if E[0] != 0 else 0.0,
        "max_vertical_tip_velocity": float(vAz),
        "max_axis_norm_error": float(np.max(np.abs(np.linalg.norm(traj.axis, axis=1) - 1.0))),
    }


def simulate(cfg: RunConfig) -> Trajectory:
    return integrate(cfg.initial, cfg.params, cfg.friction, cfg.integrator, cfg.convergence)


def run_report(cfg: RunConfig, traj: Trajectory, seed: int) -> dict:
    crit = cfg.convergence
    conv = (detect_convergence(traj, crit.tol_v, crit.tol_axis, crit.window)
            if crit is not None else detect_convergence(traj))
    LA3 = float(cfg.initial.L @ cfg.initial.axis)
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "params": cfg.params.as_dict(),
        "friction": {"kind": "constant", "mu": cfg.friction.constant},
        "termination": traj.termination.as_dict(),
        "convergence": conv.as_dict(),
        "stability": classify_stability(LA3, cfg.params).as_dict(),
        "drifts": drifts(traj),
        "max_tilt": max_tilt(traj),
        "stats": {**traj.stats, "n_samples": len(traj)},
    }


def write_json(data: dict, path: Path) -> None:
    text = json.dumps(data, indent=2, sort_keys=True, allow_nan=False, default=_json_default)
    path.write_text(text + "\n", encoding="utf-8")


def _resolve(out_dir: Path, name: str | None, default: str) -> Path:
    path = Path(name or default)
    return path if path.is_absolute() else out_dir / path


def _writable(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not os.access(path.parent, os.W_OK):
        raise ConfigError(f"output directory is not writable: {path.parent}")


# ---------------------------------------------------------------------------
# verbs


def cmd_run(cfg: RunConfig, out_dir: Path, seed: int, quiet: bool) -> int:
    csv_path = _resolve(out_dir, cfg.trajectory_csv, "trajectory.csv")
    json_path = _resolve(out_dir, cfg.report_json, "report.json")
    _writable(csv_path)
    _writable(json_path)
    traj = simulate(cfg)
    write_trajectory_csv(traj, csv_path)
    report = run_report(cfg, traj, seed)
    write_json(report, json_path)
    if not quiet:
        term, conv = report["termination"], report["convergence"]
        print(f"termination: {term['kind']} at t={term['t']:.6g} s")
        print(f"limit: {conv['limit']}  t_converged: {conv['t_converged']}")
        print(f"predicted upright stable: {report['stability']['upright_stable']}")
        print(f"wrote {csv_path} and {json_path}")
    if traj.termination.kind is TerminationKind.DEGENERATE_DENOMINATOR:
        return EXIT_DEGENERATE
    return EXIT_OK


def sweep_point(job: tuple) -> dict:
    """Run one grid point; failures are returned as data, never raised."""
    index, sweep, overrides = job
    row = {"index": index, **overrides}
    try:
        cfg = sweep.point_config(overrides)
        traj = simulate(cfg)
        crit = cfg.convergence
        conv = (detect_convergence(traj, crit.tol_v, crit.tol_axis, crit.window)
                if crit is not None else detect_convergence(traj))
        LA3 = float(cfg.initial.L @ cfg.initial.axis)
        row.update({
            "LA3": fmt(LA3),
            "predicted_upright_stable": classify_stability(LA3, cfg.params).upright_stable,
            "observed_limit": conv.limit.value,
            "t_converged": "" if math.isnan(conv.t_converged) else fmt(conv.t_converged),
            "termination": traj.termination.kind.value,
            "max_tilt": fmt(max_tilt(traj)),
            "error": "",
        })
    except (GlideTopError, ValueError, FloatingPointError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(path: str, out_dir: Path, seed: int, quiet: bool) -> int:
    sweep = load_sweep(path)
    summary = _resolve(out_dir, sweep.summary_csv, "sweep.csv")
    _writable(summary)
    axis_names = [p for p, _ in sweep.axes]
    header = ["index", *axis_names, *SWEEP_HEADER[1:]]
    jobs = [(i, sweep, point) for i, point in enumerate(sweep.points())]
    with summary.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, header, lineterminator="\n", restval="")
        writer.writeheader()
        fh.flush()
        if sweep.parallelism == 1:
            results = map(sweep_point, jobs)
            _emit(results, writer, fh, quiet)
        else:
            with ProcessPoolExecutor(max_workers=sweep.parallelism) as pool:
                _emit(pool.map(sweep_point, jobs), writer, fh, quiet)
    if not quiet:
        print(f"wrote {summary} ({len(jobs)} points)")
    return EXIT_OK


def _emit(results, writer, fh, quiet: bool) -> None:
    # map() yields in submission order, so the file is sorted as it grows
    for row in results:
        writer.writerow(row)
        fh.flush()
        if not quiet:
            status = row["error"] or row.get("observed_limit", "")
            print(f"point {row['index']}: {status}")


def run_checks(cfg: RunConfig, seed: int) -> list[checks.SuiteResult]:
    opts = cfg.check
    traj = simulate(cfg)
    suites = [
        checks.cross_chart_suite(cfg.params, cfg.friction, opts.n_cross_chart, seed),
        checks.conservation_suite(traj),
    ]
    if checks.is_frictionless(cfg.friction):
        suites.append(checks.SuiteResult("dissipation_identity", True, {}, skipped=True))
        suites.append(checks.classical_limit_suite(traj))
    else:
        suites.append(checks.dissipation_identity_suite(traj, cfg.friction, stride=opts.stride))
        suites.append(checks.vertical_momentum_suite(traj, cfg.friction, stride=opts.stride))
    suites.append(checks.fixed_point_suite(cfg.params, cfg.friction, opts.n_monte_carlo, seed))
    suites.append(checks.zero_reaction_suite(cfg.params, cfg.friction, opts.n_monte_carlo, seed))
    return suites


def cmd_check(cfg: RunConfig, out_dir: Path, seed: int, quiet: bool) -> int:
    json_path = _resolve(out_dir, cfg.report_json, "check.json")
    _writable(json_path)
    suites = run_checks(cfg, seed)
    passed = all(s.passed for s in suites)
    write_json({"schema_version": SCHEMA_VERSION, "seed": seed, "passed": passed,
                "params": cfg.params.as_dict(),
                "suites": [s.as_dict() for s in suites]}, json_path)
    if not quiet:
        for s in suites:
            label = "SKIP" if s.skipped else ("PASS" if s.passed else "FAIL")
            print(f"{label} {s.name}")
        print(f"wrote {json_path}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glidetop",
                                     description="Gliding heavy symmetric top simulator.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (("run", "integrate one configuration"),
                            ("sweep", "run a Cartesian grid of configurations"),
                            ("check", "run the invariant suites")):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("config", help="TOML configuration file")
        p.add_argument("--out-dir", default=".", help="directory for relative output paths")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        if args.verb == "sweep":
            return cmd_sweep(args.config, out_dir, args.seed, args.quiet)
        cfg = load_run(args.config)
        if args.verb == "run":
            return cmd_run(cfg, out_dir, args.seed, args.quiet)
        return cmd_check(cfg, out_dir, args.seed, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDenominator as exc:
        print(f"degenerate initial state: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
