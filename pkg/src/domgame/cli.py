"""Command-line entry points: boundary export, simulation, verification, service."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from .checks import run_suite
from .engine import Captured, MonitorViolation, TimedOut, monitor_closing_rate, monitor_containment, run
from .regions import boundary_arcs
from .scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _env_default(name, fallback):
    return os.environ.get(f"DOMGAME_{name}", fallback)


def cli_dominance(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        region = scenario.region()
        geo = boundary_arcs(region, args.samples)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    doc = {
        "scenario": scenario.name,
        "arcs": [
            {
                "type": arc.arc_type,
                "param_interval": list(arc.param_interval),
                "param_origin": arc.param_origin,
                "points": [[p.x, p.y, r] for p, r in zip(arc.points, arc.residuals)],
            }
            for arc in geo.arcs
        ],
        "polyline": [[p.x, p.y, r] for p, r in zip(geo.points, geo.residuals)],
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh)
    types = geo.arc_types()
    print(f"{len(types)} arcs: {', '.join(types) if types else '(empty boundary)'}")
    if args.out:
        print(f"wrote {args.out}")
    return EXIT_OK


def cli_simulate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (FileNotFoundError, ScenarioError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    cfg = scenario.config
    if args.dt is not None:
        cfg.dt = args.dt
    traj, outcome = run(cfg)
    if args.out:
        traj.write_tsv(args.out)
    bound = cfg.capture_bound()
    if isinstance(outcome, Captured):
        print(f"outcome: captured at t_f = {outcome.t_f:.6f}")
    elif isinstance(outcome, TimedOut):
        print(f"outcome: timed out at t = {outcome.t_end:.6f}")
    else:
        print(f"outcome: monitor violation ({outcome.which}) at t = {outcome.t:.6f}")
    print(f"capture-time bound (d0 - l)/(alpha - 1) = {bound:.6f}")
    region = scenario.region()
    contain = monitor_containment(traj, region, dt=cfg.dt)
    rate = monitor_closing_rate(traj, cfg.alpha, world=cfg.world)
    print(contain)
    print(rate)
    if args.out:
        print(f"wrote {args.out} ({len(traj)} rows)")
    failed = (not contain.passed) or (not rate.passed) or isinstance(outcome, MonitorViolation)
    if args.strict and failed:
        return EXIT_FAIL
    return EXIT_OK


def cli_verify(args) -> int:
    try:
        reports = run_suite(args.suite, seed=args.seed)
    except KeyError as err:
        print(f"error: {err.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    for rep in reports:
        print(rep)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([asdict(r) for r in reports], fh, default=str)
        print(f"wrote {args.out}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cli_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    app = create_app(scenario_dir=args.scenarios, console_dir=args.console)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="domgame",
        description="Dominance-region engine for pursuit-evasion games",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dom = sub.add_parser("dominance", help="export the region boundary for a scenario")
    p_dom.add_argument("--scenario", required=True)
    p_dom.add_argument("--out", default=None)
    p_dom.add_argument("--samples", type=int, default=720)
    p_dom.set_defaults(fn=cli_dominance)

    p_sim = sub.add_parser("simulate", help="run an episode and write the trajectory")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--dt", type=float, default=None)
    p_sim.add_argument("--strict", action="store_true",
                       help="nonzero exit when a monitor fails")
    p_sim.set_defaults(fn=cli_simulate)

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("--suite", default="all")
    p_ver.add_argument("--seed", type=int, default=int(_env_default("SEED", "7")))
    p_ver.add_argument("--out", default=None)
    p_ver.set_defaults(fn=cli_verify)

    p_srv = sub.add_parser("serve", help="start the live session service")
    p_srv.add_argument("--bind", default=_env_default("BIND", "127.0.0.1:8000"))
    p_srv.add_argument("--scenarios", default=_env_default("SCENARIOS", "scenarios"))
    p_srv.add_argument("--console", default=_env_default("CONSOLE", "frontend"))
    p_srv.set_defaults(fn=cli_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
