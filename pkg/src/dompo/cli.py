"""Command-line front end: steady states, stability, bifurcation scans, maps.

Subcommands: steady, stability, hopf, phase-diagram, effective-map,
simulate, verify.  Exit codes: 0 success, 2 configuration or validation
error, 3 numeric error, 4 verification failure.

Scan outputs are CSV (single header row, '.' decimal separator, 17
significant digits, deterministic byte-for-byte for a fixed config and
seed); the report commands also render a PNG figure next to each CSV.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import plotting
from .config import ScanConfig, load_any_config, load_scan_config
from .dynamics import TRAJECTORY_COLUMNS, integrate, state_vector
from .errors import DomainError, NumericError, ValidationError
from .fluctuations import MapCell, effective_map
from .params import ModelParams, load_params, validate
from .sideband import sideband_map, sideband_stability, sideband_steady_state
from .stability import classify, dopo_hopf, hopf_points
from .steady import (reconstruct_amplitudes, steady_states, trivial_solution,
                     turning_point)
from .verify import format_report, run_verification

MAP_COLUMNS = ("system", "param1", "param2", "sigma", "branch", "stable",
               "instability", "n_eff", "squeeze_factor", "theta", "margin")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _with_png(path) -> str:
    text = str(path)
    stem = text[:-4] if text.endswith(".csv") else text
    return stem + ".png"


def _print_state(params, ss, label=None):
    report = classify(params, ss)
    head = label or ss.branch
    print(f"[{head}] sigma={_fmt(ss.sigma)} I_s={_fmt(ss.I_s)} I_p={_fmt(ss.I_p)}")
    print(f"  x={_fmt(ss.x_bar)} beta_p={ss.beta_p:.12g} beta_s={ss.beta_s:.12g}")
    print(f"  stability: {report.classification} (margin {report.margin:.6g})")


def _load_model_params(args) -> ModelParams:
    if not args.config:
        raise ValidationError("this command needs --config pointing to a parameter file")
    params = load_params(args.config)
    for note in validate(params):
        print(f"note: {note}", file=sys.stderr)
    return params


def cmd_steady(args) -> int:
    params = _load_model_params(args)
    if args.I_s is not None and args.sigma is not None:
        raise ValidationError("give either --sigma or --I_s, not both")
    if args.I_s is not None:
        if args.I_s == 0:
            _print_state(params, trivial_solution(params))
        else:
            ss = reconstruct_amplitudes(params, args.I_s)
            _print_state(replace(params, sigma=ss.sigma), ss)
            _print_state(replace(params, sigma=ss.sigma),
                         trivial_solution(replace(params, sigma=ss.sigma)))
        return 0
    sigma = args.sigma if args.sigma is not None else params.sigma
    for ss in steady_states(params, sigma):
        _print_state(replace(params, sigma=sigma), ss)
    return 0


def cmd_stability(args) -> int:
    params = _load_model_params(args)
    if args.I_s is not None and args.I_s > 0:
        ss = reconstruct_amplitudes(params, args.I_s)
        params = replace(params, sigma=ss.sigma)
    else:
        if args.sigma is not None:
            params = replace(params, sigma=args.sigma)
        ss = trivial_solution(params)
    report = classify(params, ss)
    _print_state(params, ss)
    print("  eigenvalues:")
    for ev in report.eigenvalues:
        print(f"    {ev.real:+.9g} {ev.imag:+.9g}i")
    return 0


def cmd_hopf(args) -> int:
    params = _load_model_params(args)
    tp = turning_point(params)
    print(f"turning point: {_fmt(tp) or 'none'}")
    if params.g == 0:
        closed = dopo_hopf(params)
        print("closed-form Hopf: " + (
            f"I_s={_fmt(closed.I_s)} omega={_fmt(closed.omega)}" if closed else "none"))
    points = hopf_points(params, args.I_s_max, n_grid=args.n_grid)
    if not points:
        print(f"no Hopf points in (0, {args.I_s_max:g}]")
    for hb in points:
        print(f"Hopf: I_s={_fmt(hb.I_s)} omega={_fmt(hb.omega)} ({hb.branch_label})")
    if args.out:
        rows = ([(params.g, tp, "TP", None)] if tp is not None else [])
        rows += [(params.g, hb.I_s, "HB", hb.omega) for hb in points]
        write_csv(args.out, ("g", "I_s", "kind", "omega"), rows)
        print(f"wrote {args.out}")
    return 0


def _grid_classification(params: ModelParams, axis_name, axis_values, I_values,
                         threads: int):
    def cell(ij):
        i, j = ij
        p = replace(params, **{axis_name: float(axis_values[i])})
        I_s = float(I_values[j])
        try:
            ss = trivial_solution(p) if I_s == 0 else reconstruct_amplitudes(p, I_s)
            report = classify(p, ss)
            return (i, j, ss.sigma, ss.branch, report.classification, report.margin)
        except (DomainError, NumericError):
            return (i, j, math.nan, "", "undefined", math.nan)

    pairs = [(i, j) for i in range(len(axis_values)) for j in range(len(I_values))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(cell, pairs))
    else:
        results = [cell(ij) for ij in pairs]
    return sorted(results, key=lambda r: (r[0], r[1]))


def cmd_phase_diagram(args) -> int:
    cfg = _scan_config(args)
    if cfg.system != "dompo":
        raise ValidationError("phase-diagram supports only the dompo system")
    axis1, I_axis = cfg.axis1, cfg.axis2
    vals, I_vals = axis1.values(), I_axis.values()
    threads = args.threads or cfg.threads

    def boundary_col(v):
        p = replace(cfg.base, **{axis1.name: float(v)})
        rows = []
        tp = turning_point(p)
        if tp is not None and tp <= I_axis.max:
            rows.append((float(v), float(tp), "TP", None))
        for hb in hopf_points(p, I_axis.max):
            rows.append((float(v), hb.I_s, "HB", hb.omega))
        return rows

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(boundary_col, vals))
    else:
        cols = [boundary_col(v) for v in vals]
    boundary = [row for col in cols for row in col]

    out = args.out or "phase_diagram.csv"
    write_csv(out, (axis1.name, "I_s", "kind", "omega"), boundary)
    grid_rows = _grid_classification(cfg.base, axis1.name, vals, I_vals, threads)
    grid_out = (str(out)[:-4] if str(out).endswith(".csv") else str(out)) + "_grid.csv"
    write_csv(grid_out, (axis1.name, "I_s", "sigma", "branch", "classification",
                         "margin"),
              [(vals[i], I_vals[j], s, b, c, m) for i, j, s, b, c, m in grid_rows])
    print(f"wrote {out} and {grid_out}")
    if not args.no_plot:
        stable = np.array([[grid_rows[i * len(I_vals) + j][4] == "stable"
                            for j in range(len(I_vals))]
                           for i in range(len(vals))])
        png = _with_png(out)
        plotting.save_phase_diagram(boundary, (vals, I_vals, stable), png,
                                    axis_name=axis1.name)
        print(f"wrote {png}")
    return 0


def _map_cells(cfg: ScanConfig, threads: int) -> list[MapCell]:
    vals = cfg.axis1.values()
    I_vals = cfg.axis2.values()
    if cfg.system == "sideband":
        return sideband_map(cfg.base, cfg.axis1.name, vals, I_vals)
    if threads > 1:
        def column(v):
            return effective_map(cfg.base, cfg.axis1.name, [v], I_vals)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, vals))
        return [cell for col in cols for cell in col]
    return effective_map(cfg.base, cfg.axis1.name, vals, I_vals)


def cmd_effective_map(args) -> int:
    cfg = _scan_config(args)
    threads = args.threads or cfg.threads
    cells = _map_cells(cfg, threads)
    out = args.out or "effective_map.csv"
    rows = [(cfg.system, c.axis_value, c.I_s, c.sigma, c.branch, c.stable,
             c.instability, c.n_eff, c.squeeze_factor, c.theta, c.margin)
            for c in cells]
    write_csv(out, MAP_COLUMNS, rows)
    print(f"wrote {out}")
    if not args.no_plot:
        vals, I_vals = cfg.axis1.values(), cfg.axis2.values()
        n2 = len(I_vals)
        n_eff = [[cells[i * n2 + j].n_eff for j in range(n2)] for i in range(len(vals))]
        squeeze = [[cells[i * n2 + j].squeeze_factor for j in range(n2)]
                   for i in range(len(vals))]
        png = _with_png(out)
        plotting.save_effective_map(vals, I_vals, n_eff, squeeze, png,
                                    axis_name=cfg.axis1.name, n_th=cfg.base.n_th)
        print(f"wrote {png}")
    return 0


def cmd_simulate(args) -> int:
    params = _load_model_params(args)
    if args.I_s is not None and args.I_s > 0:
        ss = reconstruct_amplitudes(params, args.I_s)
        params = replace(params, sigma=ss.sigma)
    else:
        if args.sigma is not None:
            params = replace(params, sigma=args.sigma)
        ss = trivial_solution(params)
    y0 = state_vector(ss)
    if args.perturb:
        rng = np.random.default_rng(args.seed)
        kick = rng.standard_normal(6)
        y0 = y0 + args.perturb * max(1.0, float(np.linalg.norm(y0))) \
            * kick / np.linalg.norm(kick)
    traj = integrate(params, y0, args.tau_end, rtol=args.rtol, atol=args.atol,
                     n_samples=args.n_samples)
    out = args.out or "trajectory.csv"
    rows = [(t, *row) for t, row in zip(traj.times, traj.y)]
    write_csv(out, TRAJECTORY_COLUMNS, rows)
    print(f"wrote {out}")
    if not args.no_plot:
        png = _with_png(out)
        plotting.save_trajectory_plot(traj, png)
        print(f"wrote {png}")
    return 0


def cmd_verify(args) -> int:
    results = run_verification(seed=args.seed,
                               sym_factor=args.corrupt_sym_factor or 0.5,
                               with_montecarlo=not args.quick)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 4


def _scan_config(args) -> ScanConfig:
    if not args.config:
        raise ValidationError("this command needs --config pointing to a scan file")
    cfg = load_any_config(args.config)
    if not isinstance(cfg, ScanConfig):
        raise ValidationError("this command needs a scan config with base/axis1/axis2")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON parameter or scan file")
    common.add_argument("--out", help="output CSV path")
    common.add_argument("--threads", type=int, default=0,
                        help="worker threads for grid scans (0: from config)")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--no-plot", action="store_true",
                        help="skip the PNG figure next to the CSV")

    parser = argparse.ArgumentParser(
        prog="dompo",
        description="Degenerate optomechanical parametric oscillator analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", parents=[common],
                       help="print the fixed points at a drive or intensity")
    p.add_argument("--sigma", type=float, help="drive strength")
    p.add_argument("--I_s", type=float, help="signal intensity (0 for trivial)")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("stability", parents=[common],
                       help="classify one fixed point and print its spectrum")
    p.add_argument("--sigma", type=float)
    p.add_argument("--I_s", type=float)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("hopf", parents=[common],
                       help="locate Hopf bifurcations along the nontrivial branch")
    p.add_argument("--I_s-max", dest="I_s_max", type=float, default=300.0)
    p.add_argument("--n-grid", dest="n_grid", type=int, default=2000)
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("phase-diagram", parents=[common],
                       help="instability boundaries over a parameter grid")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("effective-map", parents=[common],
                       help="effective mechanical state over a grid")
    p.set_defaults(func=cmd_effective_map)

    p = sub.add_parser("simulate", parents=[common],
                       help="integrate the classical equations of motion")
    p.add_argument("--sigma", type=float)
    p.add_argument("--I_s", type=float)
    p.add_argument("--perturb", type=float, default=1e-3,
                   help="relative kick applied to the initial state")
    p.add_argument("--tau-end", dest="tau_end", type=float, default=100.0)
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--n-samples", dest="n_samples", type=int, default=2000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common],
                       help="run the randomized oracle cross-checks")
    p.add_argument("--quick", action="store_true",
                   help="skip the Monte Carlo check")
    p.add_argument("--corrupt-sym-factor", type=float, default=None,
                   help="debug: override the covariance symmetrization factor")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
