"""Batch command-line front end.

Every subcommand reads and writes plain files, prints a short summary
and drops a run manifest next to its primary output so runs can be
reproduced exactly.  Exit codes: 0 success, 2 invalid input, 3
infeasible, 4 budget or timeout with partial output.

The --threads flag sizes the worker pool; evaluation is currently
sequential and results never depend on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import (
    CapExceededError,
    InfeasibleError,
    ParseError,
    UnsupportedError,
)
from .evaluation import (
    Metrics,
    export_tradeoffs,
    scalarize,
    score,
    split_scenarios,
    weight_grid,
)
from .instances import (
    Graph,
    Instance,
    Solution,
    gen_synthetic,
    graph_to_text,
    parse_graph,
    sample_st_pairs,
)
from .mip_emit import emit_model
from .solvers import (
    solve_auto,
    solve_bnb,
    solve_brute_force,
    solve_budgeted_mix,
    solve_ellipsoid_parametric,
    solve_interval_mix,
    solve_local_search,
    solve_midpoint_approx,
)
from .tuning import ConfigSpace, baseline_grid, tune
from .uncertainty import (
    ScenarioMatrix,
    build_mixture,
    mixture_spec_from_json,
    mixture_spec_to_json,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4


def _default_seed() -> int:
    return int(os.environ.get("ROBUSTMIX_SEED", "0"))


def _write_manifest(args, argv: list[str], outputs: list[str], started: float):
    path = getattr(args, "manifest", None)
    if path is None:
        if not outputs:
            return
        path = outputs[0] + ".manifest.json"
    doc = {
        "command": args.command,
        "argv": argv,
        "seed": getattr(args, "seed", None),
        "outputs": outputs,
        "version": __version__,
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_pairs(path: str) -> list[tuple[int, int]]:
    pairs = []
    rows = list(csv.reader(io.StringIO(_read(path))))
    if not rows or rows[0] != ["source", "target"]:
        raise ParseError("pairs CSV must start with header source,target")
    for row in rows[1:]:
        if len(row) != 2:
            raise ParseError(f"bad pairs row {row!r}")
        pairs.append((int(row[0]), int(row[1])))
    return pairs


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ParseError("--weights needs three comma-separated values")
    w = tuple(float(p) for p in parts)
    if any(v < 0 for v in w):
        raise ParseError("weights must be nonnegative")
    return w


METHODS = {
    "auto": None,
    "brute": solve_brute_force,
    "bnb": solve_bnb,
    "budgeted-enum": solve_budgeted_mix,
    "interval": solve_interval_mix,
    "midpoint": solve_midpoint_approx,
    "parametric": solve_ellipsoid_parametric,
    "local": solve_local_search,
}


def _cmd_gen(args, argv, started):
    graph, scenarios = gen_synthetic(
        args.width, args.height, args.scenarios, args.noise, args.seed
    )
    with open(args.out_graph, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(graph_to_text(graph))
    with open(args.out_scenarios, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(scenarios.to_csv())
    print(f"nodes={graph.num_nodes} arcs={graph.n} scenarios={scenarios.K}")
    _write_manifest(args, argv, [args.out_graph, args.out_scenarios], started)
    return EXIT_OK


def _cmd_pairs(args, argv, started):
    graph = parse_graph(_read(args.graph))
    pairs = sample_st_pairs(graph, args.count, args.min_hops, args.seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target"])
    for s, t in pairs:
        writer.writerow([s, t])
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    print(f"pairs={len(pairs)}")
    _write_manifest(args, argv, [args.out], started)
    return EXIT_OK


def _run_method(inst, mix, args):
    method = args.method
    if method == "auto":
        return solve_auto(inst, mix, max_nodes=args.max_nodes)
    if method == "bnb":
        return solve_bnb(inst, mix, max_nodes=args.max_nodes)
    if method == "local":
        return solve_local_search(inst, mix, seed=args.seed)
    return METHODS[method](inst, mix)


def _cmd_solve(args, argv, started):
    graph = parse_graph(_read(args.graph))
    scenarios = ScenarioMatrix.from_csv(_read(args.scenarios))
    if scenarios.n != graph.n:
        raise ParseError(
            f"scenario CSV has {scenarios.n} columns, graph has {graph.n} arcs"
        )
    specs = mixture_spec_from_json(_read(args.mixture))
    mix = build_mixture(specs, scenarios)
    if args.pairs is not None:
        pairs = _load_pairs(args.pairs)
    else:
        if args.source is None or args.target is None:
            raise ParseError("need --source/--target or --pairs")
        pairs = [(args.source, args.target)]
    records = []
    budget_hit = False
    for s, t in pairs:
        inst = Instance.spath(graph, s, t)
        report = _run_method(inst, mix, args)
        budget_hit = budget_hit or not report.optimal and args.method in (
            "auto",
            "bnb",
        )
        records.append(
            {
                "source": s,
                "target": t,
                "x": list(report.solution.x),
                "objective": float(f"{report.objective:.6f}"),
                "optimal": report.optimal,
                "method": report.method,
            }
        )
        print(f"objective={report.objective:.6f} optimal={str(report.optimal).lower()}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"solutions": records}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_manifest(args, argv, [args.out], started)
    return EXIT_OK


def _cmd_evaluate(args, argv, started):
    scenarios = ScenarioMatrix.from_csv(_read(args.scenarios))
    doc = json.loads(_read(args.solutions))
    solutions = [
        Solution(tuple(rec["x"]), float(rec.get("objective", 0.0)))
        for rec in doc["solutions"]
    ]
    metrics = score(solutions, scenarios, args.alpha)
    print(metrics.format_line())
    outputs = []
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(metrics.format_line() + "\n")
        outputs.append(args.out)
    _write_manifest(args, argv, outputs, started)
    return EXIT_OK


def _cmd_baseline(args, argv, started):
    graph = parse_graph(_read(args.graph))
    scenarios = ScenarioMatrix.from_csv(_read(args.scenarios))
    pairs = _load_pairs(args.pairs)
    split = split_scenarios(scenarios.K, args.ratio, args.seed)
    grid = baseline_grid(args.type, graph, pairs, scenarios, split)
    records = [
        (f"{args.type}_lambda_{lam:.6f}", m_in, m_out) for lam, m_in, m_out in grid
    ]
    count = export_tradeoffs(records, args.out)
    print(f"rows={2 * count}")
    _write_manifest(args, argv, [args.out], started)
    return EXIT_OK


def _cmd_tune(args, argv, started):
    graph = parse_graph(_read(args.graph))
    scenarios = ScenarioMatrix.from_csv(_read(args.scenarios))
    pairs = _load_pairs(args.pairs)
    split = split_scenarios(scenarios.K, args.ratio, args.seed)
    space = ConfigSpace(budget=args.budget, max_parents=args.max_parents)
    if args.weight_grid is not None:
        weight_list = weight_grid(args.weight_grid)
    else:
        weight_list = [_parse_weights(args.weights)]

    summaries = []
    last_result = None
    for w in weight_list:
        result = tune(space, graph, pairs, scenarios, split, w, args.seed)
        summaries.append((w, result))
        last_result = result
    print(f"budget={args.budget} runs={len(weight_list)}")

    outputs = []
    if len(weight_list) == 1:
        with open(args.out_config, "w", encoding="utf-8") as fh:
            fh.write(mixture_spec_to_json(last_result.best.to_specs()))
        outputs.append(args.out_config)
    else:
        with open(args.out_config, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["w_avg", "w_max", "w_cvar", "cost", "config"])
            for w, result in summaries:
                writer.writerow(
                    [
                        f"{w[0]:.6f}",
                        f"{w[1]:.6f}",
                        f"{w[2]:.6f}",
                        f"{result.best_cost:.6f}",
                        json.dumps(result.best.to_specs(), sort_keys=True),
                    ]
                )
        outputs.append(args.out_config)
    if args.out_trace:
        with open(args.out_trace, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["generation", "config_id", "pairs", "cost", "params"])
            for w, result in summaries:
                for entry in result.trace:
                    writer.writerow(
                        [
                            entry.generation,
                            entry.config_id,
                            entry.pairs_used,
                            f"{entry.cost:.6f}",
                            json.dumps(entry.config.to_specs(), sort_keys=True),
                        ]
                    )
        outputs.append(args.out_trace)
    _write_manifest(args, argv, outputs, started)
    if last_result is not None and not last_result.completed_full_eval:
        return EXIT_BUDGET
    return EXIT_OK


def _cmd_emit_mip(args, argv, started):
    scenarios = ScenarioMatrix.from_csv(_read(args.scenarios))
    specs = mixture_spec_from_json(_read(args.mixture))
    mix = build_mixture(specs, scenarios)
    if args.graph is not None:
        graph = parse_graph(_read(args.graph))
        if args.source is None or args.target is None:
            raise ParseError("emit-mip with --graph needs --source/--target")
        inst = Instance.spath(graph, args.source, args.target)
    else:
        if args.select_n is None or args.select_p is None:
            raise ParseError("emit-mip needs --graph or --select-n/--select-p")
        inst = Instance.selection(args.select_n, args.select_p)
    stats = emit_model(inst, mix, args.out)
    print(
        f"binary={stats.num_binary} continuous={stats.num_continuous} "
        f"rows={stats.num_constraints}"
    )
    _write_manifest(args, argv, [args.out], started)
    return EXIT_OK


def _cmd_verify(args, argv, started):
    from .verify import run_suites

    ok = run_suites(args.suite, seed=args.seed, trials=args.trials)
    _write_manifest(args, argv, [], started)
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustmix",
        description="Robust combinatorial optimization under mixtures of "
        "uncertainty sets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--manifest", default=None)

    p = sub.add_parser("gen", help="generate a synthetic grid instance")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--scenarios", type=int, required=True)
    p.add_argument("--noise", choices=["mult", "two_block"], default="mult")
    p.add_argument("--out-graph", required=True)
    p.add_argument("--out-scenarios", required=True)
    common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("pairs", help="sample origin-destination pairs")
    p.add_argument("--graph", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--min-hops", type=int, default=0)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_pairs)

    p = sub.add_parser("solve", help="solve one mixture on one or more pairs")
    p.add_argument("--graph", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--mixture", required=True)
    p.add_argument("--source", type=int, default=None)
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--pairs", default=None)
    p.add_argument("--method", choices=sorted(METHODS), default="auto")
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("evaluate", help="score solutions against scenarios")
    p.add_argument("--solutions", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("baseline", help="41-point single-type lambda grid")
    p.add_argument("--type", choices=["interval", "hull", "ellipsoid"], required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--ratio", type=float, default=0.75)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("tune", help="racing tuner for mixture hyperparameters")
    p.add_argument("--graph", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--max-parents", type=int, default=3)
    p.add_argument("--ratio", type=float, default=0.75)
    p.add_argument("--weights", default=None)
    p.add_argument("--weight-grid", type=float, default=None)
    p.add_argument("--out-config", required=True)
    p.add_argument("--out-trace", default=None)
    common(p)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("emit-mip", help="emit the combined model as an LP file")
    p.add_argument("--graph", default=None)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--mixture", required=True)
    p.add_argument("--source", type=int, default=None)
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--select-n", type=int, default=None)
    p.add_argument("--select-p", type=int, default=None)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_emit_mip)

    p = sub.add_parser("verify", help="run the randomized verification suites")
    p.add_argument(
        "--suite",
        choices=["submodular", "ratio", "dual", "all"],
        default="all",
    )
    p.add_argument("--trials", type=int, default=100)
    common(p)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    started = time.monotonic()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else 0
    if args.command == "tune" and args.weights is None and args.weight_grid is None:
        print("error: tune needs --weights or --weight-grid", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args, argv, started)
    except (ParseError, UnsupportedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CapExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
