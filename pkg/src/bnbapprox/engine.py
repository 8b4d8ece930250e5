"""Generic branch-and-bound loop shared by all four solvers.

The engine owns frontier management, node selection (DFS / BFS /
best-first), the multiplicative stopping rule, the node cap and metric
collection. Problem specifics live behind a small adapter contract:

    root_payload() -> payload
    bound(payload) -> BoundInfo(lb, ub, solution, leaf)
    branch(node)   -> [ChildSpec(decision, right_turn, payload), ...]
    admit(node)    -> bool   (optional extra pruning, e.g. profile filters)
    on_insert(node)          (bookkeeping for admitted nodes)

Bound conventions: for maximization `lb` is the value of the feasible
solution carried in BoundInfo.solution and `ub` the relaxation bound; for
minimization the roles swap. Children are bounded once, at creation, and
the values reused when the node is later selected.

A single run is strictly single-threaded (selection order is semantics
bearing); independent runs may execute concurrently.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Sequence

from .rational import Rat, format_rat, rat

__all__ = [
    "Sense",
    "Selection",
    "Strategy",
    "Criterion",
    "Node",
    "BoundInfo",
    "ChildSpec",
    "BaseAdapter",
    "RunResult",
    "DegenerateBoundError",
    "AdapterContractError",
    "StrategyError",
    "should_stop",
    "select_next",
    "validate_strategy",
    "valid_strategies",
    "run",
    "RATIO_MET",
    "NODE_LIMIT",
    "FRONTIER_EMPTY",
]

RATIO_MET = "ratio-met"
NODE_LIMIT = "node-limit"
FRONTIER_EMPTY = "frontier-empty"


class Sense(Enum):
    MAX = "max"
    MIN = "min"


class Selection(Enum):
    DFS = "DFS"
    BFS = "BFS"
    BEST_FIRST = "BestFirst"


class StrategyError(ValueError):
    """Invalid strategy combination for the problem kind."""


class DegenerateBoundError(ArithmeticError):
    """Stopping ratio undefined: the global bound is zero."""


class AdapterContractError(RuntimeError):
    """An adapter violated a bound contract (non-monotone child, lb > ub)."""


@dataclass(frozen=True)
class Strategy:
    """Node selection + branching + bounding + rounding tags.

    Only combinations valid for the problem kind are accepted, see
    validate_strategy(). Best-first is called HUB on maximization runs and
    LLB on minimization runs in reports.
    """

    selection: Selection
    branching: str
    bounding: str
    rounding: str

    def label(self, sense: Sense) -> str:
        if self.selection is Selection.BEST_FIRST:
            return "HUB" if sense is Sense.MAX else "LLB"
        return self.selection.value


_VALID = {
    "knapsack": ({"CE", "PPW", "K"}, {"Surrogate"}, {"Dantzig"}),
    "scheduling": ({"MMP"}, {"BS", "LR"}, {"AS", "BM"}),
}


def validate_strategy(kind: str, strategy: Strategy) -> None:
    key = "knapsack" if kind == "knapsack" else "scheduling"
    branchings, boundings, roundings = _VALID[key]
    if strategy.branching not in branchings:
        raise StrategyError(f"branching {strategy.branching!r} invalid for {kind}")
    if strategy.bounding not in boundings:
        raise StrategyError(f"bounding {strategy.bounding!r} invalid for {kind}")
    if strategy.rounding not in roundings:
        raise StrategyError(f"rounding {strategy.rounding!r} invalid for {kind}")


def valid_strategies(kind: str) -> list[Strategy]:
    """The full strategy matrix for a problem kind, in a fixed order."""
    key = "knapsack" if kind == "knapsack" else "scheduling"
    branchings, boundings, roundings = _VALID[key]
    out = []
    for sel in (Selection.BEST_FIRST, Selection.DFS, Selection.BFS):
        for br in sorted(branchings):
            for bo in sorted(boundings):
                for ro in sorted(roundings):
                    out.append(Strategy(sel, br, bo, ro))
    return out


@dataclass(frozen=True)
class Criterion:
    """Multiplicative stopping rule: ratio-alpha (max) or ratio-eps (min)."""

    kind: str  # "ratio-alpha" | "ratio-eps"
    value: Rat

    def __post_init__(self):
        if self.kind not in ("ratio-alpha", "ratio-eps"):
            raise ValueError(f"unknown criterion {self.kind!r}")


def should_stop(best_value: Rat, global_bound: Rat, criterion: Criterion, sense: Sense) -> bool:
    """Exact stopping test; boundary values stop (the ratio is inclusive).

    best == bound always stops (covers the degenerate all-zero instance,
    which is flagged by convention rather than raised); a zero bound with a
    different best value raises DegenerateBoundError.
    """
    if best_value == global_bound:
        return True
    if global_bound == 0:
        raise DegenerateBoundError("zero global bound on a degenerate instance")
    ratio = rat(best_value) / rat(global_bound)
    if criterion.kind == "ratio-alpha":
        if sense is not Sense.MAX:
            raise ValueError("ratio-alpha applies to maximization")
        return ratio >= criterion.value
    if sense is not Sense.MIN:
        raise ValueError("ratio-eps applies to minimization")
    return ratio <= 1 + criterion.value


@dataclass
class Node:
    id: int
    parent: int | None
    depth: int
    decisions: tuple[tuple[int, int], ...]
    lb: Rat
    ub: Rat
    right_turn: bool
    left_turns: int
    leaf: bool
    payload: Any


@dataclass(frozen=True)
class BoundInfo:
    lb: Rat
    ub: Rat
    solution: Any
    leaf: bool = False


@dataclass(frozen=True)
class ChildSpec:
    decision: tuple[int, int]
    right_turn: bool
    payload: Any


class BaseAdapter:
    """Default adapter hooks; problem adapters override what they need."""

    sense: Sense = Sense.MAX
    tracks_turns: bool = False

    def root_payload(self) -> Any:
        raise NotImplementedError

    def bound(self, payload: Any) -> BoundInfo:
        raise NotImplementedError

    def branch(self, node: Node) -> Sequence[ChildSpec]:
        raise NotImplementedError

    def admit(self, node: Node) -> bool:
        return True

    def on_insert(self, node: Node) -> None:
        pass

    def extras(self) -> dict[str, Any]:
        return {}


def _selection_key(node: Node, selection: Selection, sense: Sense):
    if selection is Selection.BEST_FIRST:
        # HUB: highest upper bound; LLB: lowest lower bound. Ties: lowest id.
        if sense is Sense.MAX:
            return (-node.ub, node.id)
        return (node.lb, node.id)
    if selection is Selection.DFS:
        # Deepest, most recently inserted first.
        return (-node.depth, -node.id)
    # BFS: shallowest, earliest inserted first.
    return (node.depth, node.id)


def select_next(frontier: Iterable[Node], selection: Selection, sense: Sense) -> Node:
    """Pick the next node to process from an explicit frontier."""
    nodes = list(frontier)
    if not nodes:
        raise ValueError("empty frontier")
    return min(nodes, key=lambda n: _selection_key(n, selection, sense))


def _bound_key(node: Node, sense: Sense):
    if sense is Sense.MAX:
        return (-node.ub, node.id)
    return (node.lb, node.id)


@dataclass
class RunResult:
    best_value: Rat
    best_solution: Any
    global_bound: Rat
    nodes_explored: int
    nodes_processed: int
    max_depth: int
    left_turn_max: int | None
    nodes_after_optimum: int
    termination: str
    extras: dict[str, Any] = field(default_factory=dict)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "best_value": format_rat(self.best_value),
            "global_bound": format_rat(self.global_bound),
            "nodes_explored": self.nodes_explored,
            "nodes_processed": self.nodes_processed,
            "max_depth": self.max_depth,
            "left_turn_max": self.left_turn_max,
            "nodes_after_optimum": self.nodes_after_optimum,
            "termination": self.termination,
        }


def run(
    adapter: BaseAdapter,
    selection: Selection,
    criterion: Criterion,
    node_limit: int | None = None,
) -> RunResult:
    """Run the branch-and-bound loop to termination.

    nodes_explored counts bounded nodes (one relaxation solve each, the
    unit the node cap applies to); nodes_processed counts nodes actually
    selected and expanded, the quantity the tree-size guarantees speak
    about. A run returns when the stopping ratio is met, the node cap is
    reached (best solution so far is returned), or the frontier empties.
    """
    sense = adapter.sense
    root_payload = adapter.root_payload()
    rootb = adapter.bound(root_payload)
    if rootb.lb > rootb.ub:
        raise AdapterContractError("root has lb > ub")
    root = Node(
        id=0,
        parent=None,
        depth=0,
        decisions=(),
        lb=rootb.lb,
        ub=rootb.ub,
        right_turn=False,
        left_turns=0,
        leaf=rootb.leaf,
        payload=root_payload,
    )
    explored = 1
    processed = 0
    incumbent_value = root.lb if sense is Sense.MAX else root.ub
    incumbent_solution = rootb.solution
    explored_at_improve = explored
    max_depth = 0
    left_turn_max = 0
    next_id = 1

    frontier: dict[int, Node] = {0: root}
    select_heap: list[tuple] = []
    bound_heap: list[tuple] = []
    heapq.heappush(select_heap, (_selection_key(root, selection, sense), 0))
    heapq.heappush(bound_heap, (_bound_key(root, sense), 0))
    adapter.on_insert(root)

    def frontier_bound() -> Rat | None:
        while bound_heap:
            key, nid = bound_heap[0]
            node = frontier.get(nid)
            if node is None or _bound_key(node, sense) != key:
                heapq.heappop(bound_heap)
                continue
            return node.ub if sense is Sense.MAX else node.lb
        return None

    def pop_selected() -> Node:
        while True:
            key, nid = heapq.heappop(select_heap)
            node = frontier.get(nid)
            if node is not None and _selection_key(node, selection, sense) == key:
                del frontier[nid]
                return node

    def improves(candidate: Rat, reference: Rat) -> bool:
        return candidate > reference if sense is Sense.MAX else candidate < reference

    termination = None
    global_bound = incumbent_value
    while termination is None:
        gb = frontier_bound()
        if gb is None:
            global_bound = incumbent_value
            termination = FRONTIER_EMPTY
            break
        global_bound = gb
        if should_stop(incumbent_value, global_bound, criterion, sense):
            termination = RATIO_MET
            break
        if node_limit is not None and explored >= node_limit:
            termination = NODE_LIMIT
            break

        v = pop_selected()
        processed += 1
        if v.leaf:
            continue
        incumbent_start = incumbent_value
        updates: list[tuple[Rat, Any]] = []
        for spec in adapter.branch(v):
            if node_limit is not None and explored >= node_limit:
                termination = NODE_LIMIT
                break
            cb = adapter.bound(spec.payload)
            explored += 1
            child = Node(
                id=next_id,
                parent=v.id,
                depth=v.depth + 1,
                decisions=v.decisions + (spec.decision,),
                lb=cb.lb,
                ub=cb.ub,
                right_turn=spec.right_turn,
                left_turns=v.left_turns + (0 if spec.right_turn else 1),
                leaf=cb.leaf,
                payload=spec.payload,
            )
            next_id += 1
            if child.lb > child.ub:
                raise AdapterContractError(f"node {child.id}: lb > ub")
            if sense is Sense.MAX and child.ub > v.ub:
                raise AdapterContractError(
                    f"node {child.id}: child ub {child.ub} above parent ub {v.ub}"
                )
            if sense is Sense.MIN and child.lb < v.lb:
                raise AdapterContractError(
                    f"node {child.id}: child lb {child.lb} below parent lb {v.lb}"
                )
            max_depth = max(max_depth, child.depth)
            left_turn_max = max(left_turn_max, child.left_turns)
            candidate = child.lb if sense is Sense.MAX else child.ub
            if improves(candidate, incumbent_start):
                updates.append((candidate, cb.solution))
            pruned = (
                child.ub <= incumbent_start
                if sense is Sense.MAX
                else child.lb >= incumbent_start
            )
            if not pruned and adapter.admit(child):
                frontier[child.id] = child
                heapq.heappush(select_heap, (_selection_key(child, selection, sense), child.id))
                heapq.heappush(bound_heap, (_bound_key(child, sense), child.id))
                adapter.on_insert(child)
        for candidate, solution in updates:
            if improves(candidate, incumbent_value):
                incumbent_value = candidate
                incumbent_solution = solution
                explored_at_improve = explored
        if termination == NODE_LIMIT:
            gb = frontier_bound()
            global_bound = incumbent_value if gb is None else gb

    return RunResult(
        best_value=incumbent_value,
        best_solution=incumbent_solution,
        global_bound=global_bound,
        nodes_explored=explored,
        nodes_processed=processed,
        max_depth=max_depth,
        left_turn_max=left_turn_max if adapter.tracks_turns else None,
        nodes_after_optimum=explored - explored_at_improve,
        termination=termination,
        extras=adapter.extras(),
    )
