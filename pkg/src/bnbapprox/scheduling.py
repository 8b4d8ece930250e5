"""Makespan bounds and branch-and-bound adapter for machine scheduling.

A node fixes some jobs onto machines; the residual problem is the same
problem class again with per-machine overheads t_i (the earliest time a
machine can start). BS bounds a node by binary search for the smallest
grid value T such that the parametric load LP is feasible, where only
pairs with p_{j,i} <= T are eligible and machine i may carry load at most
T - t_i. The LR baseline bound drops the eligibility filter (the plain
makespan LP relaxation) and bisects the same grid, so BS dominates LR by
construction.

The search grid is the integer multiples of 1/D, D the least common
denominator of the node's processing times and overheads; for integer
data this is the plain integer search. Vertices of the parametric LP have
at most m fractional jobs; rounding modes:

    AS        each fractional job to its fastest machine;
    LST-match each fractional job to a distinct supporting machine along
              a bipartite matching (makespan at most 2T);
    BM        exhaustive best placement of the fractional jobs.

Branching fixes the fractional job with maximal shortest processing time
(MMP) onto each machine in turn.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .engine import (
    BaseAdapter,
    BoundInfo,
    ChildSpec,
    Criterion,
    Node,
    RunResult,
    Selection,
    Sense,
    run,
)
from .instances import SchedulingInstance
from .lp import (
    LinearProgram,
    LpError,
    fractional_graph,
    job_machine_matching,
    solve_vertex,
)
from .rational import Rat, floor_div, rat

__all__ = [
    "LpPoint",
    "TSearchResult",
    "build_load_lp",
    "min_feasible_T",
    "feasible_point",
    "list_schedule",
    "round_vertex",
    "mmp_pivot",
    "UnrelatedAdapter",
    "SchedulingOutcome",
    "solve_unrelated",
    "scheme_depth_cap",
    "schedule_makespan",
    "grid_denominator",
]

ROUNDING_AS = "AS"
ROUNDING_BM = "BM"
ROUNDING_LST = "LST-match"


@dataclass(frozen=True)
class LpPoint:
    """A basic feasible solution of the parametric load LP at guess T."""

    T: Rat
    x: Mapping[tuple[int, int], Rat]  # nonzero coordinates
    loads: tuple[Rat, ...]  # completion times t_i + assigned load
    fractional_jobs: tuple[int, ...]
    integral_assignment: Mapping[int, int]


@dataclass(frozen=True)
class TSearchResult:
    t_min: Rat
    point: LpPoint


def grid_denominator(P: Sequence[Sequence[Rat]], t: Sequence[Rat], jobs: Sequence[int]) -> int:
    d = 1
    for j in jobs:
        for v in P[j]:
            d = math.lcm(d, v.denominator)
    for v in t:
        d = math.lcm(d, v.denominator)
    return d


def build_load_lp(
    P: Sequence[Sequence[Rat]],
    t: Sequence[Rat],
    jobs: Sequence[int],
    T: Rat,
    restrict: bool = True,
) -> tuple[LinearProgram, tuple[tuple[int, int], ...]] | None:
    """The load LP at guess T plus its variable order, or None when it is
    trivially infeasible (an overfull machine or a job with no eligible
    pair). Machines without residual capacity take no variables."""
    m = len(t)
    if any(T < ti for ti in t):
        return None
    open_machines = [i for i in range(m) if T - t[i] > 0]
    pairs: list[tuple[int, int]] = []
    for j in jobs:
        row = [
            (j, i)
            for i in open_machines
            if (not restrict) or P[j][i] <= T
        ]
        if not row:
            return None
        pairs.extend(row)
    index = {pair: k for k, pair in enumerate(pairs)}
    nv = len(pairs)

    equalities = []
    for j in jobs:
        coeffs = [rat(0)] * nv
        for i in open_machines:
            k = index.get((j, i))
            if k is not None:
                coeffs[k] = rat(1)
        equalities.append((tuple(coeffs), rat(1)))
    inequalities = []
    for i in open_machines:
        coeffs = [rat(0)] * nv
        hit = False
        for j in jobs:
            k = index.get((j, i))
            if k is not None:
                coeffs[k] = P[j][i]
                hit = True
        if hit:
            inequalities.append((tuple(coeffs), T - t[i]))
    return LinearProgram(nv, tuple(equalities), tuple(inequalities)), tuple(pairs)


def feasible_point(
    P: Sequence[Sequence[Rat]],
    t: Sequence[Rat],
    jobs: Sequence[int],
    T: Rat,
    restrict: bool = True,
) -> LpPoint | None:
    """Vertex of the load LP at guess T, or None when infeasible.

    restrict=True applies the eligibility filter p_{j,i} <= T; machines
    with no residual capacity (T - t_i <= 0) take no variables either way.
    """
    built = build_load_lp(P, t, jobs, T, restrict)
    if built is None:
        return None
    lp, pairs = built
    vertex = solve_vertex(lp)
    if vertex is None:
        return None

    x = {pair: v for pair, v in zip(pairs, vertex.values) if v != 0}
    loads = list(t)
    for (j, i), v in x.items():
        loads[i] += P[j][i] * v
    by_job: dict[int, list[tuple[int, Rat]]] = {}
    for (j, i), v in x.items():
        by_job.setdefault(j, []).append((i, v))
    fractional = []
    integral: dict[int, int] = {}
    for j in jobs:
        entries = by_job.get(j, [])
        if len(entries) == 1 and entries[0][1] == 1:
            integral[j] = entries[0][0]
        else:
            fractional.append(j)
    return LpPoint(T, x, tuple(loads), tuple(fractional), integral)


def list_schedule(
    P: Sequence[Sequence[Rat]], t: Sequence[Rat], jobs: Sequence[int]
) -> tuple[dict[int, int], Rat]:
    """Greedy integer schedule (jobs in given order, least resulting load)."""
    loads = [rat(v) for v in t]
    assignment: dict[int, int] = {}
    for j in jobs:
        best = min(range(len(t)), key=lambda i: (loads[i] + P[j][i], i))
        assignment[j] = best
        loads[best] += P[j][best]
    return assignment, max(loads) if loads else rat(0)


def min_feasible_T(
    P: Sequence[Sequence[Rat]],
    t: Sequence[Rat],
    jobs: Sequence[int],
    restrict: bool = True,
    lo_hint: Rat | None = None,
) -> TSearchResult:
    """Smallest grid T with a feasible load LP, plus a vertex there.

    The bracket is [max(max overhead, largest minimal processing time,
    averaged load bound), list-schedule makespan]; lo_hint (a known valid
    lower bound, e.g. the parent node's optimum) can tighten it.
    """
    m = len(t)
    D = grid_denominator(P, t, jobs)

    lo = max(t) if t else rat(0)
    if jobs:
        if restrict:
            lo = max(lo, max(min(P[j]) for j in jobs))
        total = sum((min(P[j]) for j in jobs), start=rat(0)) + sum(t, start=rat(0))
        lo = max(lo, total / m)
    if lo_hint is not None:
        lo = max(lo, lo_hint)
    _, upper = list_schedule(P, t, jobs)
    upper = max(upper, lo)

    k_lo = -floor_div(-lo * D, 1)  # ceil to the grid
    k_hi = upper * D
    if k_hi.denominator != 1:
        raise LpError("list-schedule makespan off the search grid")
    k_hi = max(int(k_hi), k_lo)

    cached: LpPoint | None = None
    while k_lo < k_hi:
        mid = (k_lo + k_hi) // 2
        point = feasible_point(P, t, jobs, Rat(mid, D), restrict)
        if point is None:
            k_lo = mid + 1
        else:
            k_hi = mid
            cached = point
    t_min = Rat(k_lo, D)
    if cached is None or cached.T != t_min:
        cached = feasible_point(P, t, jobs, t_min, restrict)
        if cached is None:
            raise LpError("upper bracket infeasible; bracket construction is broken")
    return TSearchResult(t_min, cached)


def _makespan(
    P: Sequence[Sequence[Rat]], t: Sequence[Rat], assignment: Mapping[int, int]
) -> Rat:
    loads = [rat(v) for v in t]
    for j, i in assignment.items():
        loads[i] += P[j][i]
    return max(loads) if loads else rat(0)


def round_vertex(
    point: LpPoint,
    P: Sequence[Sequence[Rat]],
    t: Sequence[Rat],
    mode: str,
) -> tuple[dict[int, int], Rat]:
    """Integral schedule from a vertex: integral jobs stay, fractional move.

    LST-match reassigns along an injection into supporting machines and is
    guaranteed a makespan of at most twice the vertex's T (asserted on
    every call); AS uses each job's fastest machine; BM exhausts all
    placements of the (at most m) fractional jobs.
    """
    m = len(t)
    assignment = dict(point.integral_assignment)
    frac = point.fractional_jobs
    if not frac:
        return assignment, _makespan(P, t, assignment)
    if mode == ROUNDING_AS:
        for j in frac:
            assignment[j] = min(range(m), key=lambda i: (P[j][i], i))
        return assignment, _makespan(P, t, assignment)
    if mode == ROUNDING_LST:
        graph = fractional_graph(point.x, m)
        matching = job_machine_matching(graph)
        if matching is None:
            raise LpError("no fractional-job matching: vertex structure bug")
        assignment.update(matching)
        makespan = _makespan(P, t, assignment)
        assert makespan <= 2 * point.T, "matching rounding exceeded twice the guess"
        return assignment, makespan
    if mode == ROUNDING_BM:
        if m ** len(frac) > 2_000_000:
            raise ValueError(
                f"best-matching rounding would scan {m}^{len(frac)} placements; "
                "use AS or LST-match on this many machines"
            )
        best_assign: dict[int, int] | None = None
        best_makespan: Rat | None = None
        for combo in itertools.product(range(m), repeat=len(frac)):
            cand = dict(assignment)
            cand.update(zip(frac, combo))
            mk = _makespan(P, t, cand)
            if best_makespan is None or mk < best_makespan:
                best_assign, best_makespan = cand, mk
        assert best_assign is not None and best_makespan is not None
        return best_assign, best_makespan
    raise ValueError(f"unknown rounding mode {mode!r}")


def mmp_pivot(point: LpPoint, P: Sequence[Sequence[Rat]]) -> int:
    """Fractional job with maximal shortest processing time; ties lowest id."""
    if not point.fractional_jobs:
        raise ValueError("no fractional job to pivot on")
    return max(point.fractional_jobs, key=lambda j: (min(P[j]), -j))


def scheme_depth_cap(m: int, eps: Rat) -> int:
    return floor_div(m * m, eps)


@dataclass
class _SchedState:
    jobs: tuple[int, ...]
    t: tuple[Rat, ...]
    fixed: dict[int, int]
    lo_hint: Rat | None = None
    point: LpPoint | None = None


class UnrelatedAdapter(BaseAdapter):
    """Engine adapter: BS or LR bounding, AS or BM rounding, MMP branching."""

    sense = Sense.MIN

    def __init__(
        self,
        inst: SchedulingInstance,
        bounding: str = "BS",
        rounding: str = ROUNDING_AS,
        depth_cap: int | None = None,
    ):
        if bounding not in ("BS", "LR"):
            raise ValueError(f"unknown bounding {bounding!r}")
        self.inst = inst
        self.P = inst.processing
        self.m = inst.m
        self.restrict = bounding == "BS"
        self.rounding = rounding
        self.depth_cap = depth_cap

    def root_payload(self) -> _SchedState:
        return _SchedState(tuple(range(self.inst.n)), self.inst.overheads, {})

    def bound(self, state: _SchedState) -> BoundInfo:
        res = min_feasible_T(
            self.P, state.t, state.jobs, restrict=self.restrict, lo_hint=state.lo_hint
        )
        state.point = res.point
        lb = res.t_min
        if not res.point.fractional_jobs:
            solution = dict(state.fixed)
            solution.update(res.point.integral_assignment)
            ub = _makespan(self.P, self.inst.overheads, solution)
            assert ub == lb, "integral vertex off its minimal guess"
            return BoundInfo(lb, ub, solution, leaf=True)
        assignment, ub = round_vertex(res.point, self.P, state.t, self.rounding)
        solution = dict(state.fixed)
        solution.update(assignment)
        pivot = mmp_pivot(res.point, self.P)
        assert ub <= lb + self.m * min(self.P[pivot]), (
            "rounded makespan exceeded the pivot-controlled bound"
        )
        return BoundInfo(lb, ub, solution, leaf=False)

    def branch(self, node: Node) -> list[ChildSpec]:
        if self.depth_cap is not None and node.depth >= self.depth_cap:
            return []
        state: _SchedState = node.payload
        assert state.point is not None
        pivot = mmp_pivot(state.point, self.P)
        rest = tuple(j for j in state.jobs if j != pivot)
        out = []
        for i in range(self.m):
            t_new = tuple(
                v + self.P[pivot][i] if k == i else v for k, v in enumerate(state.t)
            )
            fixed = dict(state.fixed)
            fixed[pivot] = i
            out.append(
                ChildSpec(
                    decision=(pivot, i),
                    right_turn=False,
                    payload=_SchedState(rest, t_new, fixed, lo_hint=node.lb),
                )
            )
        return out


@dataclass
class SchedulingOutcome:
    assignment: dict[int, int]
    makespan: Rat
    result: RunResult


def solve_unrelated(
    inst: SchedulingInstance,
    eps: Rat,
    selection: Selection = Selection.BEST_FIRST,
    bounding: str = "BS",
    rounding: str = ROUNDING_AS,
    node_limit: int | None = None,
    depth_cap: int | None = None,
) -> SchedulingOutcome:
    """Run the (1+eps)-scheme on an unrelated/uniform/identical instance.

    depth_cap limits branching depth (used by the BFS variant, which keeps
    the guarantee under the cap floor(m^2/eps)). Best-first runs assert the
    tree-depth bound of the scheme after the fact.
    """
    eps = rat(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    adapter = UnrelatedAdapter(inst, bounding=bounding, rounding=rounding, depth_cap=depth_cap)
    criterion = Criterion("ratio-eps", eps)
    result = run(adapter, selection, criterion, node_limit=node_limit)
    if selection is Selection.BEST_FIRST and depth_cap is None and node_limit is None:
        cap = scheme_depth_cap(inst.m, eps)
        assert result.max_depth <= cap, (
            f"best-first tree reached depth {result.max_depth} > {cap}"
        )
    assignment = dict(result.best_solution)
    return SchedulingOutcome(assignment, result.best_value, result)


def schedule_makespan(inst: SchedulingInstance, assignment: Mapping[int, int]) -> Rat:
    """Makespan of a complete assignment (validates completeness)."""
    if sorted(assignment) != list(range(inst.n)):
        raise ValueError("assignment must place every job exactly once")
    return _makespan(inst.processing, inst.overheads, assignment)
