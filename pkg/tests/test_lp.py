import random

import pytest

from bnbapprox.kernel import KERNEL
from bnbapprox._pivot_py import pivot as pivot_py
from bnbapprox.lp import (
    LinearProgram,
    fractional_graph,
    graph_is_forest,
    job_machine_matching,
    satisfies,
    solve_vertex,
)
from bnbapprox.oracle import enumerate_vertices
from bnbapprox.rational import rat
from bnbapprox.scheduling import build_load_lp, feasible_point


def test_solve_trivial_equality():
    # {x >= 0, x <= 1, x = 1} -> vertex x = 1
    lp = LinearProgram(1, (((rat(1),), rat(1)),), (((rat(1),), rat(1)),))
    vertex = solve_vertex(lp)
    assert vertex is not None and vertex.values == (rat(1),)


def test_solve_infeasible_pair():
    # x1 + x2 = 1, x1 <= 1/2, x2 <= 1/3 -> infeasible
    lp = LinearProgram(
        2,
        (((rat(1), rat(1)), rat(1)),),
        (((rat(1), rat(0)), rat(1, 2)), ((rat(0), rat(1)), rat(1, 3))),
    )
    assert solve_vertex(lp) is None


P332 = ((rat(3), rat(3)), (rat(3), rat(3)), (rat(2), rat(2)))
T0 = (rat(0), rat(0))


def test_parametric_lp_332_all_basic_solutions():
    # m=2 identical machines, jobs (3,3,2), T=4: feasible, and every vertex
    # has at most 2 fractional jobs (checked by full enumeration)
    built = build_load_lp(P332, T0, range(3), rat(4))
    assert built is not None
    lp, pairs = built
    vertices = enumerate_vertices(lp)
    assert vertices  # feasible
    for values in vertices:
        frac_jobs = {
            pairs[k][0] for k, v in enumerate(values) if 0 < v < 1
        }
        assert len(frac_jobs) <= 2
    point = feasible_point(P332, T0, range(3), rat(4))
    assert point is not None
    assert tuple(point.x[p] for p in pairs if p in point.x)  # solver agrees it is feasible
    assert len(point.fractional_jobs) <= 2


def test_vertex_resubstitution_and_enumeration_agreement():
    rnd = random.Random(424242)
    feasible_count = 0
    for _ in range(400):
        nv = rnd.randint(1, 6)
        eqs = tuple(
            (tuple(rat(rnd.randint(-3, 3)) for _ in range(nv)), rat(rnd.randint(-2, 4)))
            for _ in range(rnd.randint(0, 2))
        )
        ineqs = tuple(
            (tuple(rat(rnd.randint(-3, 3)) for _ in range(nv)), rat(rnd.randint(-2, 6)))
            for _ in range(rnd.randint(0, 3))
        )
        lp = LinearProgram(nv, eqs, ineqs)
        vertex = solve_vertex(lp)
        vertices = enumerate_vertices(lp)
        if vertex is None:
            assert not vertices
        else:
            feasible_count += 1
            assert satisfies(lp, vertex.values)
            assert vertex.values in vertices
    assert feasible_count > 100


def test_solver_deterministic():
    lp = LinearProgram(
        3,
        (((rat(1), rat(1), rat(1)), rat(2)),),
        (((rat(2), rat(0), rat(1)), rat(3)), ((rat(0), rat(1), rat(1)), rat(2))),
    )
    first = solve_vertex(lp)
    for _ in range(5):
        assert solve_vertex(lp) == first


def test_fractional_graph_shapes():
    # fully integral point: no job nodes
    g = fractional_graph({(0, 1): rat(1), (1, 0): rat(1)}, 2)
    assert g.jobs == () and g.edges == ()
    # one split job: one node of degree 2 (from the (3,3,2)/T=4 system)
    point = feasible_point(P332, T0, range(3), rat(4))
    assert point is not None
    g = fractional_graph(point.x, 2)
    assert len(g.jobs) == 1
    job = g.jobs[0]
    assert [e for e in g.edges if e[0] == job] == [(job, 0), (job, 1)]
    assert graph_is_forest(g)
    matching = job_machine_matching(g)
    assert matching is not None and set(matching) == set(g.jobs)


def test_fractional_graph_flags_too_many_jobs():
    x = {(j, i): rat(1, 2) for j in range(3) for i in range(2)}
    with pytest.raises(AssertionError):
        fractional_graph(x, 2)


def test_graph_cycle_detection():
    g = fractional_graph(
        {(0, 0): rat(1, 2), (0, 1): rat(1, 2), (1, 0): rat(1, 2), (1, 1): rat(1, 2)}, 2
    )
    assert not graph_is_forest(g)


def test_kernel_implementations_agree():
    rnd = random.Random(9)
    for _ in range(50):
        rows = rnd.randint(2, 5)
        cols = rnd.randint(2, 6)
        tab = [[rnd.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        r = rnd.randrange(rows)
        c = rnd.randrange(cols)
        if tab[r][c] == 0:
            tab[r][c] = 3
        den = 1
        a = [row[:] for row in tab]
        b = [row[:] for row in tab]
        from bnbapprox.kernel import pivot as pivot_active

        na = pivot_active(a, r, c, den)
        nb = pivot_py(b, r, c, den)
        assert na == nb and a == b
    assert KERNEL in ("cython", "python")
