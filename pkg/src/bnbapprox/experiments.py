"""Experiment harness: strategy sweeps, CSV emission, geometric-mean summaries.

One CSV row per (instance, ratio, strategy) run. All non-time columns are
deterministic for a fixed config. The optimality gap is filled when the
instance fits the oracle budget, blank otherwise; gap geometric means add
a documented 1e-9 offset so zero gaps do not collapse the mean.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from . import oracle as oracle_mod
from .engine import (
    Criterion,
    RunResult,
    Selection,
    Sense,
    Strategy,
    StrategyError,
    run,
    valid_strategies,
    validate_strategy,
)
from .instances import ALL_KINDS, KNAPSACK, Instance, KnapsackInstance, generate
from .knapsack import KnapsackAdapter
from .rational import Rat, format_rat, parse_rat, rat
from .scheduling import UnrelatedAdapter

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "CSV_COLUMNS",
    "GAP_OFFSET",
    "run_experiment",
    "summarize",
    "write_rows",
    "read_rows",
    "write_summary",
    "format_summary_table",
    "hub_direction_warnings",
]

CSV_COLUMNS = [
    "kind",
    "n",
    "m",
    "seed",
    "instance_index",
    "ratio",
    "selection",
    "branching",
    "bounding",
    "rounding",
    "best_value",
    "global_bound",
    "nodes_explored",
    "nodes_processed",
    "max_depth",
    "left_turns",
    "nodes_after_optimum",
    "gap",
    "termination",
    "wall_time_s",
]

GAP_OFFSET = 1e-9


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    kind: str
    pairs: list[tuple[int, int]]
    ratios: list[Rat]
    instances_per_pair: int = 30
    base_seed: int = 20240101
    strategies: list[Strategy] | None = None
    node_limit: int = 10_000
    oracle_budget: int = oracle_mod.DEFAULT_BUDGET
    jobs: int = 1

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}")
        if not self.pairs:
            raise ConfigError("no (n, m) pairs configured")
        for n, m in self.pairs:
            if n < 1 or m < 1:
                raise ConfigError(f"bad pair ({n}, {m})")
        if not self.ratios:
            raise ConfigError("no alpha/epsilon values configured")
        for r in self.ratios:
            if self.kind == KNAPSACK and not 0 < r < 1:
                raise ConfigError("alpha must lie in (0, 1)")
            if self.kind != KNAPSACK and r <= 0:
                raise ConfigError("epsilon must be positive")
        if self.instances_per_pair < 1:
            raise ConfigError("instances_per_pair must be at least 1")
        if self.node_limit < 1:
            raise ConfigError("node_limit must be at least 1")
        if self.strategies is None:
            self.strategies = valid_strategies(self.kind)
        if not self.strategies:
            raise ConfigError("empty strategy matrix")
        for strat in self.strategies:
            try:
                validate_strategy(self.kind, strat)
            except StrategyError as exc:
                raise ConfigError(str(exc)) from exc

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "pairs": [list(p) for p in self.pairs],
            "ratios": [format_rat(r) for r in self.ratios],
            "instances_per_pair": self.instances_per_pair,
            "base_seed": self.base_seed,
            "strategies": None
            if self.strategies is None
            else [
                [s.selection.value, s.branching, s.bounding, s.rounding]
                for s in self.strategies
            ],
            "node_limit": self.node_limit,
            "oracle_budget": self.oracle_budget,
            "jobs": self.jobs,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        try:
            strategies = data.get("strategies")
            if strategies is not None:
                strategies = [
                    Strategy(Selection(sel), br, bo, ro)
                    for sel, br, bo, ro in strategies
                ]
            return cls(
                kind=data["kind"],
                pairs=[tuple(p) for p in data["pairs"]],
                ratios=[parse_rat(str(r)) for r in data["ratios"]],
                instances_per_pair=data.get("instances_per_pair", 30),
                base_seed=data.get("base_seed", 20240101),
                strategies=strategies,
                node_limit=data.get("node_limit", 10_000),
                oracle_budget=data.get("oracle_budget", oracle_mod.DEFAULT_BUDGET),
                jobs=data.get("jobs", 1),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed experiment config: {exc}") from exc


def _oracle_value(inst: Instance, budget: int) -> Rat | None:
    """Exact optimum when affordable, else None (gap left blank)."""
    if isinstance(inst, KnapsackInstance):
        state_estimate = inst.n
        for c in inst.capacities:
            state_estimate *= int(c) + 1
            if state_estimate > budget:
                break
        if state_estimate > budget and (inst.m + 1) ** inst.n > budget:
            return None
    else:
        if inst.m**inst.n > budget:
            return None
    try:
        return oracle_mod.exact_opt(inst, budget).optimum
    except oracle_mod.OracleBudgetExceeded:
        return None


def _run_one(inst: Instance, kind: str, ratio: Rat, strategy: Strategy, node_limit: int) -> tuple[RunResult, float, Sense]:
    start = time.perf_counter()
    if kind == KNAPSACK:
        adapter = KnapsackAdapter(inst, branching=strategy.branching)
        criterion = Criterion("ratio-alpha", ratio)
        sense = Sense.MAX
    else:
        adapter = UnrelatedAdapter(
            inst, bounding=strategy.bounding, rounding=strategy.rounding
        )
        criterion = Criterion("ratio-eps", ratio)
        sense = Sense.MIN
    result = run(adapter, strategy.selection, criterion, node_limit=node_limit)
    return result, time.perf_counter() - start, sense


def _instance_rows(cfg: ExperimentConfig, pair_index: int, instance_index: int) -> list[dict[str, Any]]:
    n, m = cfg.pairs[pair_index]
    seed = cfg.base_seed + pair_index * cfg.instances_per_pair + instance_index
    inst = generate(cfg.kind, n, m, seed)
    opt = _oracle_value(inst, cfg.oracle_budget)
    rows = []
    assert cfg.strategies is not None
    for ratio in cfg.ratios:
        for strategy in cfg.strategies:
            result, elapsed, sense = _run_one(inst, cfg.kind, ratio, strategy, cfg.node_limit)
            gap = ""
            if opt is not None:
                gap = format_rat(oracle_mod.optimality_gap(result.best_value, opt))
            rows.append(
                {
                    "kind": cfg.kind,
                    "n": n,
                    "m": m,
                    "seed": seed,
                    "instance_index": instance_index,
                    "ratio": format_rat(ratio),
                    "selection": strategy.label(sense),
                    "branching": strategy.branching,
                    "bounding": strategy.bounding,
                    "rounding": strategy.rounding,
                    "best_value": format_rat(result.best_value),
                    "global_bound": format_rat(result.global_bound),
                    "nodes_explored": result.nodes_explored,
                    "nodes_processed": result.nodes_processed,
                    "max_depth": result.max_depth,
                    "left_turns": "" if result.left_turn_max is None else result.left_turn_max,
                    "nodes_after_optimum": result.nodes_after_optimum,
                    "gap": gap,
                    "termination": result.termination,
                    "wall_time_s": f"{elapsed:.6f}",
                }
            )
    return rows


def _instance_task(args: tuple) -> list[dict[str, Any]]:
    cfg_data, pair_index, instance_index = args
    cfg = ExperimentConfig.from_json_dict(cfg_data)
    return _instance_rows(cfg, pair_index, instance_index)


def run_experiment(cfg: ExperimentConfig, out_path: str | None = None) -> list[dict[str, Any]]:
    """Run the full sweep; rows come back in deterministic (pair, seed,
    ratio, strategy) order regardless of worker count."""
    tasks = [
        (pair_index, instance_index)
        for pair_index in range(len(cfg.pairs))
        for instance_index in range(cfg.instances_per_pair)
    ]
    rows: list[dict[str, Any]] = []
    if cfg.jobs > 1:
        cfg_data = cfg.to_json_dict()
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for chunk in pool.map(
                _instance_task, [(cfg_data, p, i) for p, i in tasks]
            ):
                rows.extend(chunk)
    else:
        for pair_index, instance_index in tasks:
            rows.extend(_instance_rows(cfg, pair_index, instance_index))
    if out_path is not None:
        write_rows(rows, out_path)
    return rows


def write_rows(rows: Iterable[Mapping[str, Any]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_rows(path: str) -> list[dict[str, str]]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


_GROUP_KEY = ("kind", "n", "m", "ratio", "selection", "branching", "bounding", "rounding")

SUMMARY_COLUMNS = [
    *_GROUP_KEY,
    "runs",
    "geomean_nodes",
    "geomean_gap_offset",
    "ratio_met",
    "node_limited",
]


def summarize(rows: Sequence[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Per-group geometric means (nodes; gap with +1e-9 offset) and counts."""
    if not rows:
        raise ValueError("no result rows to summarize")
    groups: dict[tuple, list[Mapping[str, Any]]] = {}
    for row in rows:
        key = tuple(str(row[k]) for k in _GROUP_KEY)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups):
        bucket = groups[key]
        logs = [math.log(int(r["nodes_explored"])) for r in bucket]
        geo_nodes = math.exp(sum(logs) / len(logs))
        gaps = [
            float(parse_rat(str(r["gap"]))) for r in bucket if str(r["gap"]) != ""
        ]
        geo_gap = ""
        if gaps:
            geo_gap = f"{math.exp(sum(math.log(g + GAP_OFFSET) for g in gaps) / len(gaps)):.9g}"
        summary = dict(zip(_GROUP_KEY, key))
        summary.update(
            {
                "runs": len(bucket),
                "geomean_nodes": f"{geo_nodes:.6g}",
                "geomean_gap_offset": geo_gap,
                "ratio_met": sum(1 for r in bucket if r["termination"] == "ratio-met"),
                "node_limited": sum(1 for r in bucket if r["termination"] == "node-limit"),
            }
        )
        out.append(summary)
    return out


def write_summary(summary: Sequence[Mapping[str, Any]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# geomean_gap_offset adds {GAP_OFFSET} to every gap before averaging\n")
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for row in summary:
            writer.writerow(row)


def format_summary_table(summary: Sequence[Mapping[str, Any]]) -> str:
    widths = {c: max(len(c), *(len(str(r[c])) for r in summary)) for c in SUMMARY_COLUMNS}
    lines = ["  ".join(c.ljust(widths[c]) for c in SUMMARY_COLUMNS)]
    for row in summary:
        lines.append("  ".join(str(row[c]).ljust(widths[c]) for c in SUMMARY_COLUMNS))
    return "\n".join(lines)


def hub_direction_warnings(summary: Sequence[Mapping[str, Any]]) -> list[str]:
    """Expected-direction check: best-first should not explore more nodes
    (geometric mean) than DFS or BFS in otherwise identical knapsack groups.
    Violations are reported as warnings, never as failures."""
    warnings = []
    by_rest: dict[tuple, dict[str, float]] = {}
    for row in summary:
        if row["kind"] != KNAPSACK:
            continue
        rest = (row["n"], row["m"], row["ratio"], row["branching"], row["bounding"], row["rounding"])
        by_rest.setdefault(rest, {})[str(row["selection"])] = float(row["geomean_nodes"])
    for rest, sels in sorted(by_rest.items()):
        hub = sels.get("HUB")
        if hub is None:
            continue
        for other in ("DFS", "BFS"):
            val = sels.get(other)
            if val is not None and hub > val:
                warnings.append(
                    f"direction check: HUB geomean nodes {hub:.4g} > {other} {val:.4g} "
                    f"on knapsack group {rest}"
                )
    return warnings
