"""Exact-rational LP feasibility and vertex computation.

The solver answers one question: is the polyhedron
{x >= 0 : A_eq x = b_eq, A_ub x <= b_ub} non-empty, and if so, return a
vertex (basic feasible solution). There is no objective; optimization is
expressed by the callers (binary search over the makespan guess, Dantzig's
greedy for the knapsack bound).

Method: phase-1 simplex with Bland's rule on a fraction-free integer
tableau. Every row is scaled to integers once; pivoting keeps entries
integral (they are minors of the input matrix), so the hot loop does no
gcd work at all. Bland's rule plus lowest-basic-index tie-breaking in the
ratio test makes runs deterministic and cycle-free.

Thread-safety: solves are pure functions of their input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .kernel import pivot
from .rational import Rat, rat

__all__ = [
    "LinearProgram",
    "Vertex",
    "FractionalGraph",
    "LpError",
    "solve_vertex",
    "satisfies",
    "fractional_graph",
    "job_machine_matching",
    "graph_is_forest",
]


class LpError(Exception):
    """Internal solver failure (malformed program, broken invariant)."""


@dataclass(frozen=True)
class LinearProgram:
    """num_vars non-negative variables, equality and <=-inequality rows."""

    num_vars: int
    equalities: tuple[tuple[tuple[Rat, ...], Rat], ...] = ()
    inequalities: tuple[tuple[tuple[Rat, ...], Rat], ...] = ()

    def __post_init__(self):
        if self.num_vars < 0:
            raise LpError("negative variable count")
        for coeffs, _ in self.equalities + self.inequalities:
            if len(coeffs) != self.num_vars:
                raise LpError("row references undeclared variables")


@dataclass(frozen=True)
class Vertex:
    """A basic feasible solution.

    values: the structural variables (exact rationals).
    basis: basic column indices in the standard form; columns
    0..num_vars-1 are structural, the next len(inequalities) are slacks.
    """

    values: tuple[Rat, ...]
    basis: tuple[int, ...]


def _scaled_int_row(coeffs: Sequence[Rat], rhs: Rat) -> tuple[list[int], int]:
    scale = 1
    for v in coeffs:
        scale = math.lcm(scale, rat(v).denominator)
    scale = math.lcm(scale, rat(rhs).denominator)
    row = [int(v * scale) for v in coeffs]
    return row, int(rhs * scale)


def solve_vertex(lp: LinearProgram) -> Vertex | None:
    """Return a vertex of the polyhedron, or None when it is empty."""
    nv = lp.num_vars
    n_ineq = len(lp.inequalities)
    n_slack_cols = nv + n_ineq

    rows: list[list[int]] = []
    rhss: list[int] = []
    needs_artificial: list[bool] = []
    for coeffs, b in lp.equalities:
        row, bi = _scaled_int_row(coeffs, b)
        row.extend([0] * n_ineq)
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        rows.append(row)
        rhss.append(bi)
        needs_artificial.append(True)
    for k, (coeffs, b) in enumerate(lp.inequalities):
        row, bi = _scaled_int_row(coeffs, b)
        row.extend([0] * n_ineq)
        row[nv + k] = 1
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            rows.append(row)
            rhss.append(bi)
            needs_artificial.append(True)
        else:
            rows.append(row)
            rhss.append(bi)
            needs_artificial.append(False)

    nrows = len(rows)
    n_art = sum(needs_artificial)
    ncols = n_slack_cols + n_art

    basis: list[int] = []
    art_col = n_slack_cols
    tableau: list[list[int]] = []
    art_rows: list[int] = []
    for i, row in enumerate(rows):
        full = row + [0] * n_art
        if needs_artificial[i]:
            full[art_col] = 1
            basis.append(art_col)
            art_rows.append(i)
            art_col += 1
        else:
            basis.append(nv + _slack_of_row(lp, i))
        full.append(rhss[i])
        tableau.append(full)

    # Phase-1 objective: minimize the artificial sum. Reduced-cost row is
    # c_j - sum of artificial-basic rows; rhs cell holds -objective.
    obj = [0] * (ncols + 1)
    for j in range(ncols):
        cj = 1 if j >= n_slack_cols else 0
        obj[j] = cj - sum(tableau[i][j] for i in art_rows)
    obj[ncols] = -sum(tableau[i][ncols] for i in art_rows)
    tableau.append(obj)
    obj_idx = nrows

    den = 1
    rhs_col = ncols
    while True:
        enter = -1
        objrow = tableau[obj_idx]
        for j in range(n_slack_cols):  # artificials never (re)enter
            if objrow[j] < 0 and j not in basis:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best_num = best_den = 0
        for i in range(nrows):
            a = tableau[i][enter]
            if a > 0:
                bi = tableau[i][rhs_col]
                if leave < 0 or bi * best_den < best_num * a or (
                    bi * best_den == best_num * a and basis[i] < basis[leave]
                ):
                    leave, best_num, best_den = i, bi, a
        if leave < 0:  # phase-1 objective is bounded below; cannot happen
            raise LpError("unbounded phase-1 ray")
        den = pivot(tableau, leave, enter, den)
        basis[leave] = enter

    if tableau[obj_idx][rhs_col] != 0:
        return None

    del tableau[obj_idx]

    # Drive zero-valued artificials out of the basis; drop redundant rows.
    live = list(range(nrows))
    for pos in range(nrows - 1, -1, -1):
        i = live[pos]
        if basis[i] < n_slack_cols:
            continue
        enter = -1
        for j in range(n_slack_cols):
            if tableau[pos][j] != 0 and j not in basis:
                enter = j
                break
        if enter < 0:
            del tableau[pos]
            del live[pos]
            continue
        if tableau[pos][enter] < 0:
            # Row negation is safe: the artificial's value is zero here.
            tableau[pos] = [-v for v in tableau[pos]]
        den = pivot(tableau, pos, enter, den)
        basis[i] = enter

    values = [rat(0)] * nv
    out_basis = []
    for pos, i in enumerate(live):
        b = basis[i]
        out_basis.append(b)
        if b < nv:
            values[b] = Rat(tableau[pos][rhs_col], den)
    return Vertex(tuple(values), tuple(sorted(out_basis)))


def _slack_of_row(lp: LinearProgram, row_index: int) -> int:
    return row_index - len(lp.equalities)


def satisfies(lp: LinearProgram, values: Sequence[Rat]) -> bool:
    """Exact re-substitution check of every constraint (incl. x >= 0)."""
    if len(values) != lp.num_vars:
        return False
    if any(v < 0 for v in values):
        return False
    for coeffs, b in lp.equalities:
        if sum(c * v for c, v in zip(coeffs, values)) != b:
            return False
    for coeffs, b in lp.inequalities:
        if sum(c * v for c, v in zip(coeffs, values)) > b:
            return False
    return True


@dataclass(frozen=True)
class FractionalGraph:
    """Bipartite structure of fractionally assigned jobs.

    Nodes are the machines 0..num_machines-1 plus every fractional job
    (a job with an assignment coordinate strictly between 0 and 1);
    edges join a fractional job to each machine carrying such a coordinate.
    """

    num_machines: int
    jobs: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]


def fractional_graph(
    x: Mapping[tuple[int, int], Rat], num_machines: int, strict: bool = True
) -> FractionalGraph:
    """Build the fractional-assignment graph of an LP point.

    For vertices of the parametric scheduling polyhedron the job side can
    hold at most num_machines nodes; under strict=True (the default for
    solver output) a violation flags an LP-solver bug and raises
    AssertionError. strict=False admits arbitrary feasible points.
    """
    jobs: list[int] = []
    edges: list[tuple[int, int]] = []
    by_job: dict[int, list[tuple[int, Rat]]] = {}
    for (j, i), v in x.items():
        by_job.setdefault(j, []).append((i, v))
    for j in sorted(by_job):
        entries = by_job[j]
        if any(0 < v < 1 for _, v in entries):
            jobs.append(j)
            for i, v in sorted(entries):
                if 0 < v < 1:
                    edges.append((j, i))
    if strict:
        assert len(jobs) <= num_machines, (
            f"vertex has {len(jobs)} fractional jobs for {num_machines} machines; "
            "lp-vertex bug"
        )
    return FractionalGraph(num_machines, tuple(jobs), tuple(edges))


def job_machine_matching(graph: FractionalGraph) -> dict[int, int] | None:
    """Injection from fractional jobs into machines along graph edges.

    Returns None when no perfect matching on the job side exists
    (for parametric-LP vertices one always does).
    """
    adj: dict[int, list[int]] = {j: [] for j in graph.jobs}
    for j, i in graph.edges:
        adj[j].append(i)
    machine_of_job: dict[int, int] = {}
    job_of_machine: dict[int, int] = {}

    def augment(j: int, seen: set[int]) -> bool:
        for i in adj[j]:
            if i in seen:
                continue
            seen.add(i)
            if i not in job_of_machine or augment(job_of_machine[i], seen):
                job_of_machine[i] = j
                machine_of_job[j] = i
                return True
        return False

    for j in graph.jobs:
        if not augment(j, set()):
            return None
    return machine_of_job


def graph_is_forest(graph: FractionalGraph) -> bool:
    """True iff the bipartite graph has no cycle (union-find over edges)."""
    parent: dict[object, object] = {}

    def find(a):
        while parent[a] is not a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for j, i in graph.edges:
        u, v = ("job", j), ("machine", i)
        for node in (u, v):
            if node not in parent:
                parent[node] = node
        ru, rv = find(u), find(v)
        if ru is rv:
            return False
        parent[ru] = rv
    return True
