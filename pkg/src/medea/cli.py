"""Command-line entry point: ``medea validate | solve | sweep``.

Exit codes: 0 success, 1 validation failure, 2 usage or I/O error,
3 solver failure.  ``MEDEA_SOLVER=interchange`` writes the LP as fixed-format
MPS for an external solver instead of solving it.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

from medea import __version__
from medea.domain import Scenario, validate_scenario
from medea.engine import (
    OverrideError,
    apply_overrides,
    sensitivity_grid,
    sweep_wind_cap,
    run_scenario,
    sweep_zone,
)
from medea.formulation import build_lp, scenario_fingerprint
from medea.io import ConfigError, load_scenario, solver_settings, write_long_format, write_outcome, write_sweep
from medea.solver import SolverOptions
from medea.solver.mps import MpsError, write_interchange

logger = logging.getLogger("medea")

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3
SOLVER_ENV = "MEDEA_SOLVER"


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    config: str
    overrides: Dict[str, str] = field(default_factory=dict)
    scenario_hash: str = ""
    tool_version: str = __version__
    solver: str = "internal"
    wall_clock_s: float = 0.0
    solver_stats: Dict[str, float] = field(default_factory=dict)
    exit_code: int = 0

    def write(self, out_dir: str) -> str:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def parse_overrides(items: Optional[List[str]]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"override {item!r} is not key=value")
        out[key.strip()] = val.strip()
    return out


def parse_grid(text: Optional[str]) -> Dict[str, List[float]]:
    """``co2=0,25;pv=625,560;ntc=4.9`` -> axis lists."""
    axes: Dict[str, List[float]] = {}
    if not text:
        return axes
    for part in text.split(";"):
        if not part.strip():
            continue
        name, sep, vals = part.partition("=")
        name = name.strip()
        if not sep or name not in ("co2", "pv", "ntc"):
            raise UsageError(f"grid axis {part!r}: expected co2=..., pv=... or ntc=...")
        try:
            axes[name] = [float(v) for v in vals.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"grid axis {name}: values must be numbers") from None
        if not axes[name]:
            raise UsageError(f"grid axis {name} is empty")
    return axes


def _solver_mode() -> str:
    mode = os.environ.get(SOLVER_ENV, "internal").strip().lower() or "internal"
    if mode not in ("internal", "interchange"):
        raise UsageError(f"{SOLVER_ENV} must be 'internal' or 'interchange', not {mode!r}")
    return mode


def _load(config: str, overrides: Dict[str, str]) -> Scenario:
    if not os.path.isfile(config):
        raise UsageError(f"config file {config!r} not found")
    s = load_scenario(config)
    try:
        return apply_overrides(s, overrides)
    except (OverrideError, ValueError) as exc:
        msg = exc.args[0] if exc.args else exc
        raise UsageError(f"bad override: {msg}") from None


def _options(config: str) -> SolverOptions:
    try:
        return SolverOptions(**solver_settings(config))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{config}: [solver] {exc}") from None


def _report_violations(s: Scenario) -> bool:
    problems = validate_scenario(s)
    for v in problems:
        print(str(v), file=sys.stderr)
    return not problems


def cmd_validate(args) -> int:
    if not os.path.isfile(args.config):
        raise UsageError(f"config file {args.config!r} not found")
    try:
        s = load_scenario(args.config)
    except ConfigError as exc:
        print(str(exc))
        return EXIT_INVALID
    problems = validate_scenario(s)
    for v in problems:
        print(str(v))
    if not problems:
        print(f"{args.config}: ok ({len(s.zones)} zones, {s.horizon} hours)")
    return EXIT_INVALID if problems else EXIT_OK


def cmd_solve(args) -> int:
    started = time.perf_counter()
    overrides = parse_overrides(args.set)
    mode = _solver_mode()
    s = _load(args.config, overrides)
    manifest = RunManifest("solve", os.path.abspath(args.config), overrides, scenario_fingerprint(s), solver=mode)
    if not _report_violations(s):
        manifest.exit_code = EXIT_INVALID
        manifest.write(args.out)
        return EXIT_INVALID
    if mode == "interchange":
        problem = build_lp(s)
        path = os.path.join(args.out, "problem.mps")
        os.makedirs(args.out, exist_ok=True)
        write_interchange(problem, path, name=s.name[:8].upper() or "MEDEA")
        manifest.solver_stats = {"rows": problem.n_rows, "cols": problem.n_cols}
        manifest.wall_clock_s = time.perf_counter() - started
        manifest.write(args.out)
        print(f"wrote {path} ({problem.n_rows} rows, {problem.n_cols} columns)")
        return EXIT_OK

    outcome = run_scenario(s, _options(args.config))
    manifest.solver_stats = dict(outcome.solver_stats)
    manifest.wall_clock_s = time.perf_counter() - started
    if not outcome.optimal:
        print(f"solver failure: {outcome.status}: {outcome.message}", file=sys.stderr)
        manifest.exit_code = EXIT_SOLVER
        manifest.write(args.out)
        return EXIT_SOLVER
    z = sweep_zone(s)
    write_outcome(outcome, args.out, start=s.start, hour_weight=s.hour_weight, zone=z)
    manifest.write(args.out)
    added = sum(c.added - c.decommissioned for c in outcome.capacities if c.zone == z and c.kind == "wind_on")
    pv = outcome.capacity_of_kind(z, "pv")
    print(
        f"objective {outcome.objective:.6g} k; {z} wind added {added:.3f} GW; {z} pv {pv:.3f} GW; "
        f"emissions {sum(outcome.emissions.values()):.6g} t; "
        f"trade balance {z} {-outcome.trade_revenue[z]:.6g} k"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    overrides = parse_overrides(args.set)
    grid = parse_grid(args.grid)
    if not args.step > 0:
        raise UsageError("--step must be > 0")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    mode = _solver_mode()
    if mode == "interchange":
        raise UsageError(f"sweeps need solutions; unset {SOLVER_ENV} or set it to 'internal'")
    s = _load(args.config, overrides)
    manifest = RunManifest("sweep", os.path.abspath(args.config), overrides, scenario_fingerprint(s), solver=mode)
    if not _report_violations(s):
        manifest.exit_code = EXIT_INVALID
        manifest.write(args.out)
        return EXIT_INVALID
    options = _options(args.config)
    os.makedirs(args.out, exist_ok=True)

    if not grid:
        sweep = sweep_wind_cap(s, args.step, options, jobs=args.jobs)
        ok = [p for p in sweep.points if p.outcome.optimal]
        first = sweep.points[0].outcome
        if first.optimal:
            write_outcome(first, args.out, start=s.start, hour_weight=s.hour_weight, sweep=sweep)
        else:
            write_sweep(sweep, args.out)
        write_long_format([_single_cell(sweep)], os.path.join(args.out, "plot_data.csv"))
        manifest.solver_stats = {"points": len(sweep.points), "optimal_points": len(ok)}
        for p in sweep.points:
            if not p.outcome.optimal:
                print(f"cap {p.wind_cap:g} GW: {p.outcome.status}: {p.outcome.message}", file=sys.stderr)
        code = EXIT_OK if ok else EXIT_SOLVER
        print(f"{len(sweep.points)} sweep points ({len(ok)} optimal), zone {sweep.zone}")
    else:
        cells = sensitivity_grid(s, grid.get("co2"), grid.get("pv"), grid.get("ntc"), step=args.step,
                                 options=options, jobs=args.jobs)
        good = 0
        rows = []
        for cell in cells:
            cell_dir = os.path.join(args.out, "cells", cell.label)
            if cell.sweep is None:
                print(f"{cell.label}: {cell.error}", file=sys.stderr)
                rows.append([cell.label, "error", math.nan, math.nan, ""])
                continue
            write_sweep(cell.sweep, cell_dir)
            first = cell.sweep.points[0].outcome
            if first.optimal:
                good += 1
            rows.append([cell.label, first.status, cell.sweep.points[0].wind_cap, len(cell.sweep.points),
                         "" if cell.target_binding is None else str(cell.target_binding).lower()])
        _write_grid_index(os.path.join(args.out, "grid.csv"), rows)
        write_long_format(cells, os.path.join(args.out, "plot_data.csv"))
        manifest.solver_stats = {"cells": len(cells), "optimal_cells": good}
        code = EXIT_OK if good else EXIT_SOLVER
        print(f"{len(cells)} grid cells ({good} solved)")
    manifest.wall_clock_s = time.perf_counter() - started
    manifest.exit_code = code
    manifest.write(args.out)
    return code


def _single_cell(sweep):
    from medea.engine import GridCell

    return GridCell((None, None, None), sweep, None)


def _write_grid_index(path: str, rows) -> None:
    from medea.io import _write_csv

    _write_csv(path, ["cell", "status", "w_star_gw", "points", "target_binding"], rows)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="medea", description="Capacity expansion and dispatch model runner.")
    p.add_argument("--version", action="version", version=f"medea {__version__}")
    p.add_argument("--log-level", default="WARNING", help="logging level for diagnostics on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario config")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="solve one scenario and write outcome files")
    s.add_argument("config")
    s.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override co2_price, pv_capital_cost, ntc, wind_cap, horizon or a dotted key")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="wind-cap sweep, optionally over a sensitivity grid")
    w.add_argument("config")
    w.add_argument("--step", type=float, default=0.5, help="cap decrement in GW")
    w.add_argument("--grid", help="axes such as 'co2=0,25,50;pv=625,380;ntc=4.9,10'")
    w.add_argument("--set", action="append", metavar="KEY=VALUE")
    w.add_argument("--jobs", type=int, default=1, help="worker processes")
    w.add_argument("--out", default="out")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; keep 0 for --help/--version
        return int(exc.code or 0)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        # a config that parses but is wrong is a validation failure
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except (OSError, MpsError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
