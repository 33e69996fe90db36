"""Command-line front end.

Usage::

    gvf3d simulate scenario1.toml -o out/            # run, write CSV+JSON+SVG
    gvf3d simulate s1.toml s2.toml -o out/ --jobs 2  # parallel sweep
    gvf3d analyze out/scenario1.csv --fit-rate
    gvf3d find-singular scenario1.toml --box -4:4 --grid 40
    gvf3d probe-assumptions scenario1.toml --samples 100000
    gvf3d iss-sweep scenario2.toml --amplitudes 0.01,0.05,0.1
    gvf3d plot out/scenario1.csv --kind error -o error.svg

Exit codes: 0 completed, 2 singular-set/planar termination, 3 domain exit,
4 configuration error, 5 integration failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

from . import analysis, svgplot
from .dynamics import read_trajectory_csv
from .field import FieldParams
from .scenario import (EXIT_CONFIG, RunArtifactSet, Scenario, ScenarioError,
                       build_path, load_scenario, run)

__all__ = ["main"]


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(_normalize_argv(list(argv)))
    try:
        return args.handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gvf3d",
        description="guiding-vector-field path following: simulation and "
                    "numerical certification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one or more scenario files")
    p.add_argument("scenarios", nargs="+", type=Path)
    p.add_argument("-o", "--out-dir", type=Path, default=Path("out"))
    p.add_argument("--jobs", type=int, default=1,
                   help="run scenarios in parallel (per-run output dirs)")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("analyze", help="summarize a trajectory CSV")
    p.add_argument("trajectory", type=Path)
    p.add_argument("--fit-rate", action="store_true",
                   help="log-linear decay-rate fit of |e(t)|")
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("find-singular", help="locate singular points")
    p.add_argument("scenario", type=Path)
    p.add_argument("--box", default="-4:4", help="axis range lo:hi")
    p.add_argument("--grid", type=int, default=40)
    p.add_argument("--json", type=Path, help="also write the result as JSON")
    p.set_defaults(handler=_cmd_find_singular)

    p = sub.add_parser("probe-assumptions",
                       help="sampled estimates of the regularity assumptions")
    p.add_argument("scenario", type=Path)
    p.add_argument("--box", default="-4:4")
    p.add_argument("--grid", type=int, default=40)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", type=Path, help="also write the report as JSON")
    p.set_defaults(handler=_cmd_probe)

    p = sub.add_parser("iss-sweep",
                       help="ultimate error bounds for constant disturbances")
    p.add_argument("scenario", type=Path)
    p.add_argument("--amplitudes", default="0.01,0.05,0.1")
    p.add_argument("--t-end", type=float, default=30.0)
    p.add_argument("--json", type=Path, help="also write the sweep as JSON")
    p.set_defaults(handler=_cmd_iss)

    p = sub.add_parser("plot", help="render a trajectory CSV to SVG")
    p.add_argument("trajectory", type=Path)
    p.add_argument("--kind", choices=("traj3d", "error"), default="error")
    p.add_argument("--axes", default="xy",
                   help="projection axes for traj3d, e.g. xz")
    p.add_argument("-o", "--out", type=Path, required=True)
    p.set_defaults(handler=_cmd_plot)

    return parser


def _normalize_argv(argv: list[str]) -> list[str]:
    # Join "--box -4:4" into "--box=-4:4": argparse would otherwise read the
    # leading dash of a negative range as an option prefix.
    out = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token == "--box" and i + 1 < len(argv):
            out.append(f"--box={argv[i + 1]}")
            skip = True
        else:
            out.append(token)
    return out


def _parse_box(text: str):
    lo, _, hi = text.partition(":")
    try:
        return (float(lo), float(hi))
    except ValueError:
        raise ValueError(f"bad box {text!r}; expected lo:hi") from None


def _cmd_simulate(args) -> int:
    scenarios = [load_scenario(p) for p in args.scenarios]
    if len(scenarios) == 1:
        result = run(scenarios[0], args.out_dir)
        _report_run(result)
        return result.exit_code
    jobs = max(1, args.jobs)
    out_dirs = [args.out_dir / s.name for s in scenarios]
    if jobs == 1:
        results = [run(s, d) for s, d in zip(scenarios, out_dirs)]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, scenarios, out_dirs))
    worst = 0
    for result in results:
        _report_run(result)
        worst = max(worst, result.exit_code)
    return worst


def _report_run(result: RunArtifactSet) -> None:
    traj = result.trajectory
    last = traj.events[-1].kind if traj.events else "?"
    print(f"{result.scenario.name}: {last} at t={traj.times[-1]:.3f}, "
          f"final |e|={traj.final_error:.3e} -> {result.trajectory_csv}")


def _cmd_analyze(args) -> int:
    traj = read_trajectory_csv(args.trajectory)
    print(f"samples:      {len(traj.times)}")
    print(f"duration:     {traj.times[-1]:.6g} s")
    print(f"arc length:   {traj.arc_length():.6g}")
    print(f"initial |e|:  {traj.error_norms[0]:.6e}")
    print(f"final |e|:    {traj.final_error:.6e}")
    if args.fit_rate:
        fit = analysis.fit_convergence(traj, FieldParams(1.0, 1.0))
        print(f"fitted decay rate: {fit.fitted_rate:.6g} 1/s "
              f"(window {fit.window[0]:.3g}..{fit.window[1]:.3g} s, "
              f"{fit.n_window} samples)")
    return 0


def _scenario_field(args) -> tuple[Scenario, FieldParams]:
    scenario = load_scenario(args.scenario)
    return scenario, scenario.field


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {path}")


def _cmd_find_singular(args) -> int:
    scenario, params = _scenario_field(args)
    path = build_path(scenario)
    scan = analysis.find_singular_points(path, params, _parse_box(args.box),
                                         grid_n=args.grid)
    print(f"seeds tried: {scan.seeds_tried}, failed: {scan.seeds_failed}")
    for point in scan:
        x, y, z = point.location
        print(f"singular point: ({x: .12f}, {y: .12f}, {z: .12f})  "
              f"|chi| = {point.residual:.3e}")
    if not len(scan):
        print("no singular points found in box")
    if args.json:
        _write_json(args.json, scan.to_json_dict())
    return 0


def _cmd_probe(args) -> int:
    scenario, params = _scenario_field(args)
    path = build_path(scenario)
    box = _parse_box(args.box)
    scan = analysis.find_singular_points(path, params, box, grid_n=args.grid)
    report = analysis.probe_assumptions(path, params, scan.points, box,
                                        n_samples=args.samples,
                                        seed=args.seed)
    print(f"note: {report.note}")
    print(f"distance method: {report.distance_method}")
    print(f"est dist(P, C): {report.est_dist_path_singular:.6g}")
    print("kappa    inf|e|        inf|NKe|      samples")
    for kappa in sorted(report.inf_error_by_kappa):
        print(f"{kappa:<8g} {report.inf_error_by_kappa[kappa]:<13.6g} "
              f"{report.inf_nke_by_kappa[kappa]:<13.6g} "
              f"{report.shell_counts[kappa]}")
    if args.json:
        _write_json(args.json, report.to_json_dict())
    return 0


def _cmd_iss(args) -> int:
    scenario, params = _scenario_field(args)
    path = build_path(scenario)
    amplitudes = [float(a) for a in args.amplitudes.split(",") if a]
    xi0 = scenario.initial[:3]
    sweep = analysis.iss_ultimate_bound(path, params, xi0, amplitudes,
                                        t_end=args.t_end,
                                        integrator=scenario.integrator)
    print("amplitude  ultimate-bound  diverged")
    for entry in sweep.bounds:
        print(f"{entry.amplitude:<10g} {entry.bound:<15.6e} "
              f"{'yes' if entry.diverged else 'no'}")
    print(f"monotone non-decreasing: {'yes' if sweep.monotone else 'no'}")
    if args.json:
        _write_json(args.json, sweep.to_json_dict())
    return 0


def _cmd_plot(args) -> int:
    traj = read_trajectory_csv(args.trajectory)
    if args.kind == "error":
        svgplot.plot_error_series(traj, args.out)
    else:
        axes = tuple(args.axes)
        if len(axes) != 2:
            raise ValueError(f"bad axes {args.axes!r}; expected two of x,y,z")
        svgplot.plot_trajectory_projection(traj, args.out, axes=axes)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
