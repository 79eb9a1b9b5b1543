"""Command-line entry point.

Subcommands ``validate``, ``run``, ``sweep``, ``multiplier-table`` and ``fit``
read a JSON config and write artifacts to ``--out``. Exit codes: 0 success,
1 admissibility failure, 2 numerical-check failure, 3 IO/config error.
"""

import argparse
import copy
import csv
import glob
import io
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config as cfgmod
from .config import ConfigError
from .diagnostics import (Recorder, check_lyapunov, check_monotone, fit_rate,
                          plot_trace_svg, EnergyTrace)
from .dynamics import ModeSolver, ModeState, NumericalError, flag_fast_mode, run
from .grid import ZGrid
from .multiplier import MultiplierTable, bad_set_indicator, m_value
from .oracle import couette_field
from .partition import PartitionError, build_partition
from .profiles import NormalizationError, ProfileError, build_equilibrium, build_profile, validate_profile

EXIT_OK, EXIT_ADMISSIBILITY, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
ORACLE_TOL = 1e-6
RESIDUAL_TOL = 1e-10


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _dump(path, obj):
    _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _equilibrium(cfg):
    p = cfg["profile"]
    try:
        prof = build_profile(p["kind"], p["params"], float(p["L_y"]), int(p["n_points"]))
        return build_equilibrium(prof, cfg["sigma"])
    except (ProfileError, NormalizationError) as exc:
        raise ConfigError(str(exc)) from None


def _grid(cfg, eq):
    g = cfg["grid"]
    grid = ZGrid(float(g["L_z"]), int(g["n"]), float(g.get("center", 0.0)))
    lo, hi = eq.z_range
    if grid.z[0] < lo or grid.z[-1] > hi:
        raise ConfigError(f"z-grid [{grid.z[0]:g}, {grid.z[-1]:g}] exceeds the equilibrium "
                          f"range [{lo:g}, {hi:g}]; increase profile.L_y")
    return grid


def _is_couette(cfg, eq):
    return cfg["profile"]["kind"] == "constant" and np.allclose(eq.Up, 1.0, rtol=0, atol=1e-14)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(cfg, out, override=False):
    eq = _equilibrium(cfg)
    report = validate_profile(eq)
    os.makedirs(out, exist_ok=True)
    _dump(os.path.join(out, "admissibility.json"),
          {"config_hash": cfg.hash, **report.to_dict()})
    try:
        part = build_partition(eq)
        _dump(os.path.join(out, "partition.json"), {"config_hash": cfg.hash, **part.to_dict()})
    except PartitionError as exc:
        _dump(os.path.join(out, "partition.json"), {"config_hash": cfg.hash, "error": str(exc)})
    return EXIT_OK if report.passed else EXIT_ADMISSIBILITY


def _run_mode(cfg, eq, grid, table, k, part_info):
    solver = ModeSolver.from_equilibrium(eq, grid, k)
    solver.stream_log = []
    coeffs = cfg["hn_coefficients"]
    tables, cutoffs = part_info if part_info else (None, None)
    rec = Recorder(solver, table, cfg["hn_order"], tables, cutoffs)
    W0 = cfgmod.initial_data(cfg, grid, k)
    state = ModeState(k, 0.0, W0, provenance=cfg.hash)
    samples = run(solver, state, cfg["dt"], cfg["T"], cfg["stride"], on_sample=rec)
    trace = rec.trace
    ratios = [gphi / gpsi for _, gphi, gpsi, _ in solver.stream_log if gpsi > 0]
    summary = {
        "k": k,
        "fast_mode": bool(flag_fast_mode(table.nu, k)),
        "lyapunov": check_lyapunov(trace, cfg["lyapunov_tol"]),
        "lyapunov_reduced_form": check_lyapunov(trace, cfg["lyapunov_tol"], form="reduced"),
        "EA_monotone": check_monotone(trace.times, trace["EA"], cfg["lyapunov_tol"]),
        "EA_over_L2_min": float(np.min(trace["EA"] / np.where(trace["L2"] > 0, trace["L2"], 1))),
        "max_stream_residual": float(max(r for *_, r in solver.stream_log)),
        "max_stream_comparison_ratio": float(max(ratios)) if ratios else 0.0,
        "n_stream_solves": len(solver.stream_log),
    }
    if cfg["hn_order"] > 0:
        c = np.asarray(coeffs if coeffs is not None else [1.0] * (cfg["hn_order"] + 1))
        EN = trace.hn() @ c
        summary["HN"] = {"coefficients": c.tolist(),
                         **check_monotone(trace.times, EN, cfg["lyapunov_tol"])}
    try:
        rate, r2 = fit_rate(trace.times, trace["L2"], levels=tuple(cfg["fit"]["levels"]))
        summary["fit"] = {"rate": rate, "r_squared": r2}
    except ValueError as exc:
        summary["fit"] = {"rate": None, "r_squared": None, "error": str(exc)}
    if _is_couette(cfg, eq):
        mu = float(eq.profile.mu[0])
        exact = couette_field(mu, k, grid, samples[-1].t, W0)
        err = np.linalg.norm(samples[-1].W_hat - exact) / np.linalg.norm(exact)
        summary["oracle_rel_error"] = float(err)
    return trace, summary


def cmd_run(cfg, out, override=False):
    override = override or cfg["override_admissibility"]
    eq = _equilibrium(cfg)
    report = validate_profile(eq)
    os.makedirs(out, exist_ok=True)
    _dump(os.path.join(out, "admissibility.json"), {"config_hash": cfg.hash, **report.to_dict()})
    if not report.passed and not override:
        return EXIT_ADMISSIBILITY
    grid = _grid(cfg, eq)
    table = MultiplierTable.from_equilibrium(eq)
    manifest = {"config_hash": cfg.hash, "schema_version": cfgmod.SCHEMA_VERSION,
                "admissibility": report.to_dict(), "multiplier": table.to_dict(),
                "override_admissibility": bool(override), "modes": []}
    part_info = None
    if cfg["partitioned"]:
        try:
            part = build_partition(eq)
        except PartitionError as exc:
            manifest["partition_error"] = str(exc)
            _dump(os.path.join(out, "manifest.json"), manifest)
            return EXIT_ADMISSIBILITY
        part_info = (part.tables(), part.cutoffs_on(grid))
        manifest["partition"] = part.to_dict()
    failed = False
    for k in cfg["k"]:
        try:
            trace, summary = _run_mode(cfg, eq, grid, table, k, part_info)
        except NumericalError as exc:
            manifest["modes"].append({"k": k, "error": str(exc), "dump": exc.dump})
            failed = True
            continue
        _write(os.path.join(out, f"trace_k{k}.csv"), trace.to_csv())
        if cfg["svg"]:
            plot_trace_svg(trace, os.path.join(out, f"trace_k{k}.svg"), f"k = {k}")
        manifest["modes"].append(summary)
        failed |= not summary["lyapunov"]["passed"]
        failed |= summary["max_stream_residual"] > RESIDUAL_TOL
        failed |= summary.get("oracle_rel_error", 0.0) > ORACLE_TOL
    manifest["numerical_checks_passed"] = not failed
    _dump(os.path.join(out, "manifest.json"), manifest)
    if failed and not override:
        return EXIT_NUMERICAL
    return EXIT_OK


def _sweep_case(args):
    name, data, out, override = args
    cfg = cfgmod.from_dict(data)
    try:
        code = cmd_run(cfg, os.path.join(out, name), override)
    except ConfigError as exc:
        return name, EXIT_IO, str(exc)
    return name, code, None


def sweep_cases(cfg):
    params = cfg["sweep"]["parameters"]
    keys = sorted(params)
    cases = []
    for i, values in enumerate(itertools.product(*(params[k] for k in keys))):
        data = copy.deepcopy(cfg.data)
        data["sweep"] = {"parameters": {}}
        for key, val in zip(keys, values):
            cfgmod.set_path(data, key, val)
        cases.append((f"case_{i:03d}", dict(zip(keys, values)), data))
    return cases


def cmd_sweep(cfg, out, override=False, workers=1):
    cases = sweep_cases(cfg)
    if not cases:
        raise ConfigError("sweep.parameters is empty")
    os.makedirs(out, exist_ok=True)
    jobs = [(name, data, out, override) for name, _, data in cases]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_case, jobs))
    else:
        results = [_sweep_case(j) for j in jobs]
    codes = dict((name, code) for name, code, _ in results)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "assignments", "k", "rate", "r_squared", "lyapunov_passed", "exit_code"])
    for name, assign, _ in sorted(cases):
        path = os.path.join(out, name, "manifest.json")
        modes = []
        if os.path.exists(path):
            with open(path) as fh:
                modes = json.load(fh).get("modes", [])
        if not modes:
            w.writerow([name, cfgmod.canonical_json(assign), "", "", "", "", codes[name]])
        for m in modes:
            fit = m.get("fit", {})
            w.writerow([name, cfgmod.canonical_json(assign), m["k"], repr(fit.get("rate")),
                        repr(fit.get("r_squared")), m.get("lyapunov", {}).get("passed"),
                        codes[name]])
    _write(os.path.join(out, "rates.csv"), buf.getvalue())
    return max(codes.values())


def cmd_multiplier_table(cfg, out, override=False):
    eq = _equilibrium(cfg)
    table = MultiplierTable.from_equilibrium(eq)
    spec = cfg["multiplier_table"]
    k = int(spec["k"])
    ts = np.linspace(*spec["t"][:2], int(spec["t"][2]))
    xis = np.linspace(*spec["xi"][:2], int(spec["xi"][2]))
    os.makedirs(out, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "xi", "m", "bad_set"])
    for t in ts:
        m = m_value(table, t, k, xis)
        bad = bad_set_indicator(table, t, k, xis)
        for x, mv, b in zip(xis, m, bad):
            w.writerow([repr(float(t)), repr(float(x)), repr(float(mv)), int(b)])
    _write(os.path.join(out, "multiplier_table.csv"), buf.getvalue())
    _dump(os.path.join(out, "multiplier.json"), {"config_hash": cfg.hash, "k": k, **table.to_dict()})
    return EXIT_OK


def cmd_fit(cfg, out, override=False):
    paths = sorted(glob.glob(os.path.join(out, "trace_k*.csv")))
    if not paths:
        raise ConfigError(f"no trace_k*.csv files in {out}")
    fits = {}
    spec = cfg["fit"]
    for path in paths:
        with open(path) as fh:
            trace = EnergyTrace.from_csv(fh.read())
        name = os.path.basename(path)[:-4]
        try:
            rate, r2 = fit_rate(trace.times, trace["L2"], window=spec.get("window"),
                                levels=spec.get("levels"))
            fits[name] = {"rate": rate, "r_squared": r2}
        except ValueError as exc:
            fits[name] = {"rate": None, "r_squared": None, "error": str(exc)}
    _dump(os.path.join(out, "fits.json"), {"config_hash": cfg.hash, "fits": fits})
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "multiplier-table": cmd_multiplier_table,
    "fit": cmd_fit,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    common.add_argument("--override-admissibility", action="store_true",
                        help="run even when the profile fails admissibility")
    parser = argparse.ArgumentParser(prog="vardiss", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        fn = COMMANDS[args.command]
        if args.command == "sweep":
            return fn(cfg, args.out, args.override_admissibility, max(1, args.workers))
        return fn(cfg, args.out, args.override_admissibility)
    except ConfigError as exc:
        print(f"vardiss: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"vardiss: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
