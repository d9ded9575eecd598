"""Command-line scenario runner.

Commands:
    simulate <scenario.json>          integrate a model, write CSV + report
    equilibria --gamma .. --degree .. list closed-form equilibria + certificates
    sweep <scenario.json> --axis ..   equilibria/margins across a parameter axis
    validate-graph <edgelist>         check a graph file against the assumptions

Exit codes: 0 ok, 2 input error, 3 numerical failure. The environment
variable SWARMNET_SEED overrides the scenario seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dynamics, graphs, scenario, structured
from .errors import (
    ConvergenceError,
    GraphValidationError,
    NonFiniteStateError,
    ScenarioError,
    SimplexViolationError,
    SingularSystemError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_NUMERICAL_ERRORS = (SimplexViolationError, SingularSystemError, NonFiniteStateError, ConvergenceError)
_INPUT_ERRORS = (ScenarioError, GraphValidationError, FileNotFoundError, ValueError)


def _cmd_simulate(args) -> int:
    scn = scenario.load_scenario(args.scenario)
    outputs = Path(args.outputs) if args.outputs else None
    report = scenario.run_scenario(scn, outputs_override=outputs)
    match = report["matched_equilibrium"]
    print(f"scenario {scn.name}: model={scn.model} seed={report['seed']}")
    print(
        f"  consensus={report['consensus']['reached']} "
        f"spread={report['consensus']['spread']:.3e} "
        f"residual={report['stationary']['residual']:.3e}"
    )
    if "case_tag" in match:
        print(
            f"  matched {match['case_tag']} equilibrium "
            f"(xi={match['xi']:.6f}, mu={match['mu']:.6f}, zeta={match['zeta']:.6f}) "
            f"distance={match['match_distance']:.3e}"
        )
    else:
        print(f"  matched {match['kind']} equilibrium distance={match['match_distance']:.3e}")
    print(f"  report: {report['report_path']}")
    print(f"  trajectory: {report['trajectory_csv']}")
    return EXIT_OK


def _cmd_equilibria(args) -> int:
    params = dynamics.ModelParams(
        gamma=args.gamma, r=args.r, alpha=args.alpha, sigma=args.sigma
    )
    dist = structured.load_distribution_csv(args.dist) if args.dist else None
    listing = scenario.list_equilibria(params, args.degree, dist)
    print(json.dumps(listing, indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scn = scenario.load_scenario(args.scenario)
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    if not values:
        raise ScenarioError("--values must contain at least one number")
    out = scenario.sweep_scenario(
        scn, args.axis, values, Path(args.out) if args.out else None
    )
    print(f"sweep over {args.axis} ({len(values)} points): {out}")
    return EXIT_OK


def _cmd_validate_graph(args) -> int:
    graph = graphs.load_edgelist(args.edgelist)
    print(f"{args.edgelist}: regular graph, n={graph.n}, degree={graph.d}, edges={graph.edge_count}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmnet",
        description="Collective decision dynamics on regular networks of populations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario file")
    p_sim.add_argument("scenario", help="path to a scenario JSON file")
    p_sim.add_argument("--outputs", help="override the scenario's output directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_eq = sub.add_parser("equilibria", help="closed-form equilibria and certificates")
    p_eq.add_argument("--gamma", type=float, required=True)
    p_eq.add_argument("--r", type=float, required=True)
    p_eq.add_argument("--alpha", type=float, required=True)
    p_eq.add_argument("--sigma", type=float, required=True)
    p_eq.add_argument("--degree", type=int, required=True)
    p_eq.add_argument("--dist", help="optional k,p distribution CSV for the structured table")
    p_eq.set_defaults(func=_cmd_equilibria)

    p_sw = sub.add_parser("sweep", help="sweep one parameter axis of a scenario")
    p_sw.add_argument("scenario", help="path to the base scenario JSON file")
    p_sw.add_argument("--axis", required=True, choices=["gamma", "r", "alpha", "sigma", "d"])
    p_sw.add_argument("--values", required=True, help="comma-separated axis values")
    p_sw.add_argument("--out", help="output CSV path (default: outputs dir)")
    p_sw.set_defaults(func=_cmd_sweep)

    p_vg = sub.add_parser("validate-graph", help="validate an edge-list file")
    p_vg.add_argument("edgelist", help="path to an edge-list text file")
    p_vg.set_defaults(func=_cmd_validate_graph)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
