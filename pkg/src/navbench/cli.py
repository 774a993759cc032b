"""Command-line entry point.

    navbench gen-maps      --out DIR --count N [--seed S] [--style empty|furnished] ...
    navbench gen-scenarios --maps DIR --out FILE --per-map K [--seed S] ...
    navbench run           --agent blind|classic|belief --suite FILE --out DIR ...
    navbench report        --out DIR [--curves]
    navbench serve         --suite FILE [--port P] [--debug-overlay] [--ui DIR]
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import mapgen
from .config import load_config
from .report import plot_curves, write_report
from .scenarios import generate_scenarios, load_scenarios, save_scenarios
from .suite import AGENT_KINDS, run_suite
from .world import save_map


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None,
                   help="YAML config file; flags override its values")


def _gen_maps(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.style == "empty":
        rooms, clutter = (1, 1), 0.0
    else:
        rooms, clutter = (2, 4), args.clutter
    params = mapgen.GeneratorConfig(width=args.width, height=args.height,
                                    rooms=rooms, clutter=clutter)
    for i in range(args.count):
        world = mapgen.generate_map(args.seed + i, params)
        path = out / f"{args.style}_{args.seed + i:05d}.map"
        save_map(world, path)
        print(path)
    return 0


def _gen_scenarios(args) -> int:
    maps = sorted(Path(args.maps).glob("*.map"))
    if not maps:
        print(f"no .map files under {args.maps}", file=sys.stderr)
        return 1
    scenarios = generate_scenarios(maps, per_map=args.per_map, seed=args.seed,
                                   budget=args.budget,
                                   success_radius=args.radius,
                                   min_length=args.min_length)
    save_scenarios(scenarios, args.out)
    print(f"{len(scenarios)} scenarios -> {args.out}")
    return 0


def _run(args) -> int:
    overrides: dict = {}
    if args.localizer:
        overrides.setdefault("localizer", {})["kind"] = args.localizer
    config = load_config(args.config, overrides)
    scenarios = load_scenarios(args.suite)
    if args.seed is not None:
        import dataclasses

        scenarios = [dataclasses.replace(s, seed=args.seed + i)
                     for i, s in enumerate(scenarios)]
    report = run_suite(args.agent, scenarios, config,
                       parallelism=args.parallel,
                       record_trajectories=args.save_trajectories)
    write_report(report, args.out, save_trajectories=args.save_trajectories)
    s = report.summary_dict()
    print(f"{args.agent}: n={s['episodes']} SR={s['sr_pct']}% "
          f"SPL={s['spl_pct']}% pace={s['pace_pct']}%")
    return 0


def _report(args) -> int:
    import csv as _csv
    import json

    out = Path(args.out)
    summaries = sorted(out.glob("summary_*.json"))
    if not summaries:
        print(f"no summaries under {out}", file=sys.stderr)
        return 1
    for sp in summaries:
        s = json.loads(sp.read_text())
        print(f"{s['agent']}: n={s['episodes']} SR={s['sr_pct']}% "
              f"SPL={s['spl_pct']}% pace={s['pace_pct']}%")
    if args.curves:
        # rebuild SuiteReport-shaped curve data from the saved tables
        from .metrics import SuiteReport

        reports = []
        for cp in sorted(out.glob("curves_*.csv")):
            agent = cp.stem.removeprefix("curves_")
            curves: dict = {"sr": [], "spl": [], "pace": []}
            with open(cp, newline="") as f:
                for row in _csv.DictReader(f):
                    value = None if row["value"] == "NA" else float(row["value"])
                    curves[row["metric"]].append((float(row["L_m"]), value))
            reports.append(SuiteReport(agent=agent, n_episodes=0, sr=0.0,
                                       spl=0.0, pace=0.0, curves=curves))
        svg = out / "curves.svg"
        plot_curves(reports, svg)
        print(svg)
    return 0


def _serve(args) -> int:
    import uvicorn

    from .teleop import create_app

    config = load_config(args.config)
    app = create_app(suite_path=args.suite, config=config,
                     debug_overlay=args.debug_overlay,
                     min_action_interval=args.min_action_interval,
                     ui_dir=args.ui, results_dir=args.out)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="navbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-maps", help="generate world maps")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--style", choices=("empty", "furnished"), default="furnished")
    p.add_argument("--width", type=int, default=60)
    p.add_argument("--height", type=int, default=40)
    p.add_argument("--clutter", type=float, default=0.15)
    p.set_defaults(func=_gen_maps)

    p = sub.add_parser("gen-scenarios", help="sample start-goal pairs")
    p.add_argument("--maps", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--per-map", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=500)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--min-length", type=float, default=1.0)
    p.set_defaults(func=_gen_scenarios)

    p = sub.add_parser("run", help="run an agent over a scenario suite")
    p.add_argument("--agent", choices=AGENT_KINDS, required=True)
    p.add_argument("--localizer", choices=("perfect", "odom", "odometry", "scanmatch"),
                   default=None)
    p.add_argument("--suite", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--seed", type=int, default=None,
                   help="override per-scenario seeds")
    p.add_argument("--save-trajectories", action="store_true")
    _add_config_args(p)
    p.set_defaults(func=_run)

    p = sub.add_parser("report", help="print summaries; --curves renders SVG")
    p.add_argument("--out", required=True)
    p.add_argument("--curves", action="store_true")
    p.set_defaults(func=_report)

    p = sub.add_parser("serve", help="teleoperation session server")
    p.add_argument("--suite", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--out", default="teleop_results")
    p.add_argument("--debug-overlay", action="store_true")
    p.add_argument("--min-action-interval", type=float, default=0.1,
                   help="seconds between accepted actions (10 Hz cap)")
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    _add_config_args(p)
    p.set_defaults(func=_serve)

    args = parser.parse_args(argv)
    if args.command == "run" and args.localizer == "odom":
        args.localizer = "odometry"
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
