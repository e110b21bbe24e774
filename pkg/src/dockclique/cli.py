"""Docking graphs solved as max-weight clique problems with simulated QAOA circuits.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiment
from .experiment import PRESETS, ExperimentSpec, SpecError
from .oracle import max_weight_clique
from .phc4graph import (
    DeltaSum,
    GraphValidationError,
    InstanceFormatError,
    PharmacophoreInstance,
    TauBuffer,
    build_graph,
    load_graph,
    load_instance,
    save,
    to_dot,
)
from .relax import to_warm_start_angles

log = logging.getLogger("dockclique")


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _add_solve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=["conventional", "dc", "ws", "wsdc"])
    p.add_argument("--layers", type=_positive_int)
    p.add_argument("--penalty", type=float)
    p.add_argument("--warm-start", choices=experiment.WARM_STARTS)
    p.add_argument("--eps", type=float)
    p.add_argument("--iters", type=_positive_int)
    p.add_argument("--shots", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--optimizer", choices=["nelder-mead", "spsa"])
    p.add_argument("--top-k", type=_positive_int)


def _spec_from_args(args) -> ExperimentSpec:
    overrides = {
        "family": args.family,
        "layers": args.layers,
        "penalty": args.penalty,
        "warm_start": args.warm_start,
        "epsilon": args.eps,
        "iters": args.iters,
        "shots": args.shots,
        "seed": args.seed,
        "method": args.optimizer,
        "top_k": args.top_k,
    }
    if args.preset and args.graph:
        raise UsageError("use either --graph or --preset, not both")
    if args.preset:
        return ExperimentSpec.from_preset(args.preset, **overrides)
    if not args.graph:
        raise UsageError("one of --graph or --preset is required")
    return ExperimentSpec(graph=args.graph, **{k: v for k, v in overrides.items() if v is not None})


def cmd_build(args) -> int:
    if args.rule == "tau" and args.tau is None:
        raise UsageError("--rule tau needs --tau")
    if args.rule == "delta" and args.delta is None:
        raise UsageError("--rule delta needs --delta")
    instance = load_instance(args.instance)
    if not isinstance(instance, PharmacophoreInstance):
        raise UsageError(f"{args.instance} is a graph file, not a pharmacophore instance")
    rule = TauBuffer(args.tau) if args.rule == "tau" else DeltaSum(args.delta)
    kind_weights = json.loads(Path(args.kind_weights).read_text()) if args.kind_weights else None
    graph = build_graph(instance, rule, kind_weights)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save(graph, out)
    out.with_suffix(".dot").write_text(to_dot(graph))
    log.info("wrote %d-vertex graph with %d edges to %s", graph.n, len(graph.edges), out)
    return 0


def cmd_solve(args) -> int:
    spec = _spec_from_args(args)
    result = experiment.run_experiment(spec)
    result.write(args.out)
    summary = result.summary()
    log.info(
        "best <H_C> %.6f after %d evaluations; solution %s (oracle %s)",
        summary["best_value"], summary["evaluations"], summary["solution_vertices"], summary["oracle_vertices"],
    )
    return 0


def cmd_compare(args) -> int:
    if args.grid:
        if args.specs:
            raise UsageError("use either spec files or --grid, not both")
        warm = args.warm_starts.split(",") if args.warm_starts else None
        specs = experiment.grid_specs(args.grid, warm_starts=warm, iters=args.iters, seed=args.seed)
    else:
        if len(args.specs) < 2:
            raise UsageError("need >= 2 specs to compare")
        specs = [ExperimentSpec.from_dict(json.loads(Path(p).read_text())) for p in args.specs]
    results = experiment.compare(specs, workers=args.workers)
    experiment.write_comparison(results, args.out)
    if args.save_runs:
        for r in results:
            r.write(Path(args.out) / r.spec.name)
    for r in results:
        log.info("%s: best %.6f, matches oracle: %s", r.spec.name, r.trace.best_value, r.matches_oracle)
    return 0


def cmd_relax(args) -> int:
    graph = load_graph(args.graph)
    sol = experiment.relax_graph(graph, args.method, args.penalty, args.seed)
    data = sol.to_dict()
    data["epsilon"] = args.eps
    data["thetas"] = [float(t) for t in to_warm_start_angles(sol, args.eps).thetas]
    _emit(data, args.out)
    return 0


def cmd_oracle(args) -> int:
    _emit(max_weight_clique(load_graph(args.graph)).to_dict(), args.out)
    return 0


def cmd_preset(args) -> int:
    save(experiment.preset_graph(args.name), args.out)
    return 0


def _emit(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dockclique", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="pharmacophore instance -> interaction graph")
    p.add_argument("instance")
    p.add_argument("--rule", choices=["tau", "delta"], default="tau")
    p.add_argument("--tau", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--kind-weights", help="JSON file mapping kind -> vertex weight")
    p.add_argument("--out", default="graph.json")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="run one QAOA experiment")
    p.add_argument("--graph")
    p.add_argument("--preset", choices=sorted(PRESETS))
    _add_solve_flags(p)
    p.add_argument("--out", default="run")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run several experiments on one graph and align their costs")
    p.add_argument("specs", nargs="*", help="experiment spec JSON files")
    p.add_argument("--grid", choices=sorted(PRESETS), help="penalty {1,2} x layers {1,2} grid on a preset")
    p.add_argument("--warm-starts", help="comma list crossed with the grid, e.g. linear,quadratic,none")
    p.add_argument("--iters", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--save-runs", action="store_true", help="also write each run's artifacts")
    p.add_argument("--out", default="compare")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("relax", help="solve a continuous relaxation")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", choices=["linear", "quadratic"], default="linear")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--penalty", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("oracle", help="exact max-weight clique")
    p.add_argument("--graph", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("preset", help="write a preset graph to a file")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out", default="graph.json")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, SpecError) as exc:
        parser.print_usage(sys.stderr)
        print(f"dockclique: error: {exc}", file=sys.stderr)
        return 2
    except (InstanceFormatError, GraphValidationError, OSError, ValueError, RuntimeError, MemoryError) as exc:
        print(f"dockclique: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
