"""Multi-knapsack bound, rounding and branch-and-bound adapter.

Bounding merges the knapsacks into one (capacity sum), solves that single
fractional knapsack by Dantzig's greedy in unit-profit order and reads the
result back as an optimal point of the per-knapsack LP relaxation: walking
the merged capacity line [0, C_1) [C_1, C_1+C_2) ... assigns every item's
overlap with segment k to knapsack k. The value equals the LP-relaxation
optimum of the original program.

The critical item of knapsack k is the first item in unit-profit order
whose cumulative weight passes the k-th capacity boundary. The integer
rounding x' is the best *feasible* candidate among: each critical item
placed alone in the first knapsack that fits it, and the floor of the
fractional solution (items lying inside a single segment). When every item
fits in some knapsack the best candidate is an (m+1)-approximation of the
fractional optimum; the B&B adapter guarantees that precondition by
dropping items that fit in no residual knapsack before bounding a node.

Branching fixes a pivot item into each knapsack it fits (left turns) or
excludes it from all (the rightmost child, a right turn). Pivot rules:
CE (most profitable critical item), PPW (largest unit profit among
fractionally assigned items), K (largest unit profit among unfixed items).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .engine import BaseAdapter, BoundInfo, ChildSpec, Node, Sense
from .instances import KnapsackInstance
from .rational import Rat, rat

__all__ = [
    "DantzigSolution",
    "dantzig_solve",
    "unit_profit_order",
    "branch_children",
    "pick_pivot",
    "KnapsackAdapter",
    "c_alpha_m",
    "assignment_value",
    "assignment_feasible",
]


def c_alpha_m(alpha: Rat, m: int) -> Rat:
    """Left-turn budget per root-leaf path: 1 + max{mα/(1-α)², (m+1)/(1-α)}."""
    alpha = rat(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    one_minus = 1 - alpha
    return 1 + max(m * alpha / one_minus**2, (m + 1) / one_minus)


def unit_profit_order(weights: Sequence[Rat], profits: Sequence[Rat]) -> tuple[int, ...]:
    """Item ids by decreasing profit/weight; zero weights first, ties by id."""
    def key(j: int):
        if weights[j] == 0:
            return (0, 0, j)
        return (1, -profits[j] / weights[j], j)

    return tuple(sorted(range(len(weights)), key=key))


@dataclass(frozen=True)
class DantzigSolution:
    """Fractional optimum of the relaxation plus its integer rounding.

    x_frac holds the nonzero coordinates of the optimal fractional point
    (keyed by (item, knapsack)); sub_value is its profit. critical_items
    are the distinct critical items in boundary order; best_critical is the
    most profitable of them (ties to the lowest item id). int_assignment /
    int_value describe the rounded integer solution x'.
    """

    order: tuple[int, ...]
    x_frac: Mapping[tuple[int, int], Rat]
    sub_value: Rat
    critical_items: tuple[int, ...]
    best_critical: int | None
    int_assignment: Mapping[int, int]
    int_value: Rat

    @property
    def fractional(self) -> bool:
        return any(0 < v < 1 for v in self.x_frac.values())


def dantzig_solve(
    inst: KnapsackInstance,
    items: Sequence[int] | None = None,
    order: Sequence[int] | None = None,
    caps: Sequence[Rat] | None = None,
) -> DantzigSolution:
    """Solve the fractional relaxation of (a subset of) an instance.

    `items` restricts to a sub-instance (default: all items) and `caps`
    overrides the capacities (for node sub-problems with reduced
    capacities); `order` may carry a precomputed unit-profit order of the
    full instance, of which the live items form a subsequence.
    """
    weights, profits = inst.weights, inst.profits
    if caps is None:
        caps = inst.capacities
    if items is None:
        items = range(inst.n)
    live = set(items)
    if order is None:
        order = unit_profit_order(weights, profits)
    seq = tuple(j for j in order if j in live)

    m = len(caps)
    boundaries = []
    acc = rat(0)
    for c in caps:
        acc += c
        boundaries.append(acc)
    total = acc

    x_frac: dict[tuple[int, int], Rat] = {}
    free_assign: dict[int, int] = {}
    cursor = rat(0)
    cumulative: list[Rat] = []
    weighted: list[int] = []
    for j in seq:
        w = weights[j]
        if w == 0:
            # Zero-weight items carry free profit: pre-assigned, never critical.
            x_frac[(j, 0)] = rat(1)
            free_assign[j] = 0
            continue
        start, end = cursor, cursor + w
        if start < total:
            for k in range(m):
                lo = boundaries[k] - caps[k]
                hi = boundaries[k]
                overlap = min(end, hi) - max(start, lo)
                if overlap > 0:
                    x_frac[(j, k)] = overlap / w
        cursor = end
        cumulative.append(cursor)
        weighted.append(j)

    criticals: list[int] = []
    for k in range(m):
        s_k = next(
            (j for j, cum in zip(weighted, cumulative) if cum > boundaries[k]), None
        )
        if s_k is not None and s_k not in criticals:
            criticals.append(s_k)

    sub_value = sum(
        (profits[j] * v for (j, _), v in x_frac.items()), start=rat(0)
    )

    best_critical = None
    for s in criticals:
        if best_critical is None or profits[s] > profits[best_critical] or (
            profits[s] == profits[best_critical] and s < best_critical
        ):
            best_critical = s

    floor_assign = dict(free_assign)
    for (j, k), v in x_frac.items():
        if v == 1:
            floor_assign[j] = k
    free_value = sum((profits[j] for j in free_assign), start=rat(0))
    floor_value = sum((profits[j] for j in floor_assign), start=rat(0))

    candidates: list[tuple[Rat, dict[int, int]]] = []
    for s in criticals:
        fit = next((k for k in range(m) if weights[s] <= caps[k]), None)
        if fit is not None:
            assign = dict(free_assign)
            assign[s] = fit
            candidates.append((free_value + profits[s], assign))
    candidates.append((floor_value, floor_assign))

    int_value, int_assignment = candidates[0]
    for value, assign in candidates[1:]:
        if value > int_value:
            int_value, int_assignment = value, assign

    return DantzigSolution(
        order=seq,
        x_frac=x_frac,
        sub_value=sub_value,
        critical_items=tuple(criticals),
        best_critical=best_critical,
        int_assignment=int_assignment,
        int_value=int_value,
    )


def pick_pivot(sol: DantzigSolution, rule: str) -> int | None:
    """Select the branching item under CE, PPW or K; None when none exists."""
    if rule == "CE":
        return sol.best_critical
    if rule == "PPW":
        fractional = {j for (j, _), v in sol.x_frac.items() if 0 < v < 1}
        return next((j for j in sol.order if j in fractional), None)
    if rule == "K":
        return sol.order[0] if sol.order else None
    raise ValueError(f"unknown branching rule {rule!r}")


def branch_children(
    inst: KnapsackInstance,
    alive: Sequence[int],
    caps: Sequence[Rat],
    sol: DantzigSolution,
    rule: str,
) -> list[ChildSpec]:
    """Children for the chosen pivot: one per knapsack it fits, plus exclusion.

    Inclusion children that would overfill their knapsack are dropped here;
    the exclusion child (the rightmost one) always survives.
    """
    pivot = pick_pivot(sol, rule)
    if pivot is None:
        raise ValueError("no eligible pivot: node is integral, caller should have stopped")
    w = inst.weights[pivot]
    rest = tuple(j for j in alive if j != pivot)
    children: list[ChildSpec] = []
    m = len(caps)
    for k in range(m):
        if w <= caps[k]:
            new_caps = tuple(c - w if i == k else c for i, c in enumerate(caps))
            children.append(
                ChildSpec(decision=(pivot, k), right_turn=False, payload=(rest, new_caps, pivot, k))
            )
    children.append(
        ChildSpec(decision=(pivot, m), right_turn=True, payload=(rest, tuple(caps), pivot, m))
    )
    return children


@dataclass
class _NodeState:
    alive: tuple[int, ...]
    caps: tuple[Rat, ...]
    fixed_profit: Rat
    fixed_assign: dict[int, int]
    sol: DantzigSolution | None = None
    usable: tuple[int, ...] = ()


@dataclass
class AuditRecord:
    sub_value: Rat
    int_value: Rat
    best_critical_profit: Rat | None


class KnapsackAdapter(BaseAdapter):
    """Engine adapter: surrogate/Dantzig bounds, CE/PPW/K branching."""

    sense = Sense.MAX
    tracks_turns = True

    def __init__(self, inst: KnapsackInstance, branching: str = "CE", audit: bool = False):
        self.inst = inst
        self.branching = branching
        self.order = unit_profit_order(inst.weights, inst.profits)
        self.audit = audit
        self.audit_records: list[AuditRecord] = []

    def root_payload(self) -> _NodeState:
        free = {j for j in range(self.inst.n) if self.inst.weights[j] == 0}
        fixed_assign = {j: 0 for j in sorted(free)}
        fixed_profit = sum((self.inst.profits[j] for j in free), start=rat(0))
        alive = tuple(j for j in range(self.inst.n) if j not in free)
        return _NodeState(alive, self.inst.capacities, fixed_profit, fixed_assign)

    def bound(self, state: _NodeState) -> BoundInfo:
        cap_max = max(state.caps)
        usable = tuple(j for j in state.alive if self.inst.weights[j] <= cap_max)
        sol = dantzig_solve(self.inst, items=usable, order=self.order, caps=state.caps)
        state.sol = sol
        state.usable = usable
        self._check_rounding_guarantees(sol)
        solution = dict(state.fixed_assign)
        solution.update(sol.int_assignment)
        return BoundInfo(
            lb=state.fixed_profit + sol.int_value,
            ub=state.fixed_profit + sol.sub_value,
            solution=solution,
            leaf=not sol.fractional,
        )

    def _check_rounding_guarantees(self, sol: DantzigSolution) -> None:
        # Every usable item fits somewhere, which makes both inequalities
        # guaranteed; a violation is a solver bug.
        m = self.inst.m
        assert (m + 1) * sol.int_value >= sol.sub_value, "(m+1)-approximation violated"
        if sol.best_critical is not None and sol.sub_value > 0:
            p_star = self.inst.profits[sol.best_critical]
            gap_ok = p_star * (m + 1) >= sol.sub_value
            slack_ok = p_star * m >= sol.sub_value - sol.int_value
            assert gap_ok or slack_ok, "critical-item profit bound violated"
        if self.audit:
            self.audit_records.append(
                AuditRecord(
                    sub_value=sol.sub_value,
                    int_value=sol.int_value,
                    best_critical_profit=None
                    if sol.best_critical is None
                    else self.inst.profits[sol.best_critical],
                )
            )

    def branch(self, node: Node) -> list[ChildSpec]:
        state: _NodeState = node.payload
        assert state.sol is not None
        specs = branch_children(self.inst, state.usable, state.caps, state.sol, self.branching)
        out = []
        for spec in specs:
            rest, caps, pivot, target = spec.payload
            assign = dict(state.fixed_assign)
            profit = state.fixed_profit
            if target < self.inst.m:
                assign[pivot] = target
                profit = profit + self.inst.profits[pivot]
            child = _NodeState(rest, caps, profit, assign)
            out.append(ChildSpec(spec.decision, spec.right_turn, child))
        return out


def assignment_value(inst: KnapsackInstance, assignment: Mapping[int, int]) -> Rat:
    return sum((inst.profits[j] for j in assignment), start=rat(0))


def assignment_feasible(inst: KnapsackInstance, assignment: Mapping[int, int]) -> bool:
    loads = [rat(0)] * inst.m
    seen = set()
    for j, k in assignment.items():
        if j in seen or not 0 <= k < inst.m:
            return False
        seen.add(j)
        loads[k] += inst.weights[j]
    return all(load <= cap for load, cap in zip(loads, inst.capacities))
