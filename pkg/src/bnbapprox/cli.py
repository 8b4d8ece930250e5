"""Command-line interface.

Subcommands: generate (write a random instance file), solve (run one
solver on one instance), oracle (exact optimum), experiment (strategy
sweep to CSV), summarize (geometric-mean summary of a sweep CSV).

Exit codes: 0 success, 2 validation error, 3 oracle budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys

from .engine import (
    Criterion,
    RunResult,
    Selection,
    Strategy,
    StrategyError,
    run,
    validate_strategy,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    format_summary_table,
    hub_direction_warnings,
    read_rows,
    run_experiment,
    summarize,
    write_summary,
)
from .instances import (
    ALL_KINDS,
    IDENTICAL,
    KNAPSACK,
    UNIFORM,
    InstanceError,
    KnapsackInstance,
    SchedulingInstance,
    generate,
    load_instance,
    save_instance,
)
from .knapsack import KnapsackAdapter
from .oracle import OracleBudgetExceeded, exact_opt
from .profiles import solve_identical, solve_uniform
from .rational import format_rat, parse_rat
from .scheduling import UnrelatedAdapter, scheme_depth_cap

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ORACLE_BUDGET = 3

_SELECTIONS = {
    "HUB": Selection.BEST_FIRST,
    "LLB": Selection.BEST_FIRST,
    "BestFirst": Selection.BEST_FIRST,
    "DFS": Selection.DFS,
    "BFS": Selection.BFS,
}


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=1, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _result_payload(result: RunResult, algorithm: str) -> dict:
    payload = result.to_json_dict()
    payload["algorithm"] = algorithm
    payload["assignment"] = {str(k): v for k, v in sorted(result.best_solution.items())}
    return payload


def cmd_generate(args: argparse.Namespace) -> int:
    inst = generate(args.kind, args.n, args.m, args.seed)
    save_instance(inst, args.out)
    print(f"wrote {args.kind} instance (n={args.n}, m={args.m}, seed={args.seed}) to {args.out}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    selection = _SELECTIONS[args.selection]
    if args.algorithm == "knapsack":
        if not isinstance(inst, KnapsackInstance):
            raise InstanceError("knapsack solver needs a knapsack instance")
        alpha = parse_rat(args.alpha)
        strategy = Strategy(selection, args.branching, "Surrogate", "Dantzig")
        validate_strategy(KNAPSACK, strategy)
        adapter = KnapsackAdapter(inst, branching=args.branching)
        result = run(adapter, selection, Criterion("ratio-alpha", alpha), node_limit=args.node_limit)
        _emit(_result_payload(result, "knapsack"), args.out)
        return EXIT_OK
    if not isinstance(inst, SchedulingInstance):
        raise InstanceError(f"{args.algorithm} solver needs a scheduling instance")
    eps = parse_rat(args.eps)
    if args.algorithm == "unrelated":
        strategy = Strategy(selection, "MMP", args.bounding, args.rounding)
        validate_strategy(inst.kind, strategy)
        depth_cap = scheme_depth_cap(inst.m, eps) if args.bfs_depth_cap else None
        adapter = UnrelatedAdapter(
            inst, bounding=args.bounding, rounding=args.rounding, depth_cap=depth_cap
        )
        result = run(adapter, selection, Criterion("ratio-eps", eps), node_limit=args.node_limit)
        _emit(_result_payload(result, "unrelated"), args.out)
        return EXIT_OK
    if args.algorithm == "uniform":
        if inst.kind not in (UNIFORM, IDENTICAL):
            raise InstanceError("profile solver needs a uniform or identical instance")
        outcome = solve_uniform(inst, eps, selection=selection, node_limit=args.node_limit)
    else:
        if inst.kind != IDENTICAL:
            raise InstanceError("identical-machines solver needs an identical instance")
        outcome = solve_identical(inst, eps, selection=selection, node_limit=args.node_limit)
    payload = outcome.result.to_json_dict()
    payload["algorithm"] = args.algorithm
    payload["makespan"] = format_rat(outcome.makespan)
    payload["scale"] = format_rat(outcome.scale)
    payload["assignment"] = {str(j): i for j, i in sorted(outcome.assignment.items())}
    _emit(payload, args.out)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    res = exact_opt(inst, budget=args.budget)
    payload = {
        "optimum": format_rat(res.optimum),
        "method": res.method,
        "witness": {str(k): v for k, v in sorted(res.witness.items())},
    }
    _emit(payload, args.out)
    return EXIT_OK


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for part in text.split(","):
        n, _, m = part.strip().partition("x")
        pairs.append((int(n), int(m)))
    return pairs


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = ExperimentConfig.from_json_dict(json.load(fh))
        if args.jobs is not None:
            cfg.jobs = args.jobs
    else:
        if not (args.kind and args.pairs and args.ratios):
            raise ConfigError("need --config or all of --kind/--pairs/--ratios")
        cfg = ExperimentConfig(
            kind=args.kind,
            pairs=_parse_pairs(args.pairs),
            ratios=[parse_rat(r) for r in args.ratios.split(",")],
            instances_per_pair=args.instances_per_pair,
            base_seed=args.base_seed,
            node_limit=args.node_limit,
            jobs=args.jobs if args.jobs is not None else 1,
        )
    rows = run_experiment(cfg, args.out)
    print(f"wrote {len(rows)} result rows to {args.out}")
    return EXIT_OK


def cmd_summarize(args: argparse.Namespace) -> int:
    rows = read_rows(args.results)
    if not rows:
        raise ConfigError(f"no rows in {args.results}")
    summary = summarize(rows)
    if args.out:
        write_summary(summary, args.out)
    print(format_summary_table(summary))
    for warning in hub_direction_warnings(summary):
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnbapprox",
        description="Branch-and-bound solvers with approximation guarantees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a random instance file")
    gen.add_argument("--kind", required=True, choices=ALL_KINDS)
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--m", required=True, type=int)
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("--instance", required=True)
    solve.add_argument(
        "--algorithm",
        required=True,
        choices=["knapsack", "unrelated", "uniform", "identical"],
    )
    solve.add_argument("--alpha", default="9/10", help="knapsack target ratio")
    solve.add_argument("--eps", default="1/10", help="scheduling tolerance")
    solve.add_argument("--selection", default="BestFirst", choices=sorted(_SELECTIONS))
    solve.add_argument("--branching", default="CE", choices=["CE", "PPW", "K"])
    solve.add_argument("--bounding", default="BS", choices=["BS", "LR"])
    solve.add_argument("--rounding", default="AS", choices=["AS", "BM"])
    solve.add_argument("--node-limit", type=int, default=None)
    solve.add_argument(
        "--bfs-depth-cap",
        action="store_true",
        help="cap branching depth at floor(m^2/eps) (BFS variant)",
    )
    solve.add_argument("--out", default=None)
    solve.set_defaults(func=cmd_solve)

    orc = sub.add_parser("oracle", help="exact optimum of an instance")
    orc.add_argument("--instance", required=True)
    orc.add_argument("--budget", type=int, default=5_000_000)
    orc.add_argument("--out", default=None)
    orc.set_defaults(func=cmd_oracle)

    exp = sub.add_parser("experiment", help="run a strategy sweep to CSV")
    exp.add_argument("--config", default=None, help="JSON config file")
    exp.add_argument("--kind", default=None, choices=ALL_KINDS)
    exp.add_argument("--pairs", default=None, help="e.g. 5x2,10x2,10x5")
    exp.add_argument("--ratios", default=None, help="comma-separated rationals")
    exp.add_argument("--instances-per-pair", type=int, default=30)
    exp.add_argument("--base-seed", type=int, default=20240101)
    exp.add_argument("--node-limit", type=int, default=10_000)
    exp.add_argument("--jobs", type=int, default=None)
    exp.add_argument("--out", required=True)
    exp.set_defaults(func=cmd_experiment)

    summ = sub.add_parser("summarize", help="summarize a sweep CSV")
    summ.add_argument("--results", required=True)
    summ.add_argument("--out", default=None)
    summ.set_defaults(func=cmd_summarize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_BUDGET
    except (InstanceError, ConfigError, StrategyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
