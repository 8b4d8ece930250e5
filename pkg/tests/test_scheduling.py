import random

import pytest

from bnbapprox.engine import Criterion, Selection, run
from bnbapprox.instances import IDENTICAL, SchedulingInstance, generate
from bnbapprox.lp import fractional_graph, job_machine_matching
from bnbapprox.oracle import exact_opt
from bnbapprox.rational import rat
from bnbapprox.rng import SplitMix64
from bnbapprox.scheduling import (
    ROUNDING_AS,
    ROUNDING_BM,
    ROUNDING_LST,
    UnrelatedAdapter,
    grid_denominator,
    list_schedule,
    min_feasible_T,
    mmp_pivot,
    round_vertex,
    schedule_makespan,
    solve_unrelated,
    scheme_depth_cap,
)

P332 = ((rat(3), rat(3)), (rat(3), rat(3)), (rat(2), rat(2)))
T00 = (rat(0), rat(0))


def test_min_feasible_T_332():
    res = min_feasible_T(P332, T00, range(3))
    assert res.t_min == 4
    assert res.point.loads == (rat(4), rat(4))
    assert len(res.point.fractional_jobs) == 1
    # T=3 infeasible, certified by the bracket/bisection invariant
    from bnbapprox.scheduling import feasible_point

    assert feasible_point(P332, T00, range(3), rat(3)) is None


def test_min_feasible_T_single_job():
    res = min_feasible_T(((rat(7),),), (rat(0),), range(1))
    assert res.t_min == 7
    assert res.point.fractional_jobs == ()


def test_min_feasible_T_with_overheads():
    res = min_feasible_T(((rat(10), rat(10)),), (rat(5), rat(0)), range(1))
    assert res.t_min == 10


def test_grid_denominator_rational_data():
    P = ((rat(3, 2), rat(3)), (rat(2), rat(4)))
    assert grid_denominator(P, (rat(0), rat(1, 3)), range(2)) == 6
    res = min_feasible_T(P, (rat(0), rat(0)), range(2))
    assert res.t_min.denominator in (1, 2)  # grid multiple of 1/2


def test_round_vertex_modes_on_332():
    point = min_feasible_T(P332, T00, range(3)).point
    for mode in (ROUNDING_AS, ROUNDING_BM, ROUNDING_LST):
        assignment, makespan = round_vertex(point, P332, T00, mode)
        assert sorted(assignment) == [0, 1, 2]
        assert makespan == 5
        assert makespan <= 2 * point.T


def test_round_vertex_integral_passthrough():
    point = min_feasible_T(((rat(7),),), (rat(0),), range(1)).point
    assignment, makespan = round_vertex(point, ((rat(7),),), (rat(0),), ROUNDING_LST)
    assert assignment == {0: 0} and makespan == 7


def test_lst_rounding_bound_random():
    rng = SplitMix64(2024)
    for trial in range(60):
        inst = generate("scheduling-unrelated", 7, 3, 5000 + trial)
        t = list(inst.overheads)
        jobs = list(range(inst.n))
        for _ in range(rng.randint(0, 2)):
            j = jobs.pop(rng.randint(0, len(jobs) - 1))
            i = rng.randint(0, inst.m - 1)
            t[i] += inst.processing[j][i]
        res = min_feasible_T(inst.processing, tuple(t), jobs)
        _, makespan = round_vertex(res.point, inst.processing, tuple(t), ROUNDING_LST)
        assert makespan <= 2 * res.t_min


def test_bm_rounding_guards_against_blowup():
    from bnbapprox.scheduling import LpPoint

    m = 40
    P = tuple(tuple(rat(1) for _ in range(m)) for _ in range(m))
    x = {(j, i): rat(1, 2) for j in range(6) for i in (0, 1)}
    point = LpPoint(rat(10), x, tuple(rat(0) for _ in range(m)), tuple(range(6)), {})
    with pytest.raises(ValueError):
        round_vertex(point, P, tuple(rat(0) for _ in range(m)), ROUNDING_BM)


def test_mmp_pivot_rules():
    from bnbapprox.scheduling import LpPoint

    P = ((rat(9), rat(5)), (rat(8), rat(5)), (rat(9), rat(9)))
    point = LpPoint(rat(10), {}, (rat(0), rat(0)), (0, 1, 2), {})
    assert mmp_pivot(point, P) == 2  # min times 5, 5, 9
    point2 = LpPoint(rat(10), {}, (rat(0), rat(0)), (0, 1), {})
    assert mmp_pivot(point2, P) == 0  # tie on 5 -> lowest id
    single = LpPoint(rat(10), {}, (rat(0), rat(0)), (1,), {})
    assert mmp_pivot(single, P) == 1
    with pytest.raises(ValueError):
        mmp_pivot(LpPoint(rat(1), {}, (rat(0),), (), {}), P)


def test_list_schedule_upper_bracket():
    assignment, makespan = list_schedule(P332, T00, range(3))
    assert sorted(assignment) == [0, 1, 2]
    assert makespan >= 4


def test_bs_dominates_lr():
    rng = SplitMix64(77)
    for trial in range(40):
        inst = generate("scheduling-unrelated", 6, 3, 900 + trial)
        t = list(inst.overheads)
        jobs = list(range(inst.n))
        for _ in range(rng.randint(0, 3)):
            j = jobs.pop(rng.randint(0, len(jobs) - 1))
            i = rng.randint(0, inst.m - 1)
            t[i] += inst.processing[j][i]
        bs = min_feasible_T(inst.processing, tuple(t), jobs, restrict=True)
        lr = min_feasible_T(inst.processing, tuple(t), jobs, restrict=False)
        assert bs.t_min >= lr.t_min


def test_unrelated_guarantee_small():
    eps = rat(1, 2)
    for seed in range(10):
        inst = generate("scheduling-unrelated", 6, 2, seed)
        opt = exact_opt(inst).optimum
        out = solve_unrelated(inst, eps)
        assert schedule_makespan(inst, out.assignment) == out.makespan
        assert out.makespan <= (1 + eps) * opt
        assert out.makespan >= opt


def test_unrelated_eps1_m2_size_bounds():
    eps = rat(1)
    for seed in range(10):
        inst = generate("scheduling-unrelated", 8, 2, 40 + seed)
        out = solve_unrelated(inst, eps)
        assert out.result.max_depth <= scheme_depth_cap(2, eps) == 4
        assert out.result.nodes_processed <= 2**4


def test_bfs_variant_with_depth_cap():
    eps = rat(1, 2)
    for seed in range(8):
        inst = generate("scheduling-unrelated", 7, 2, 70 + seed)
        opt = exact_opt(inst).optimum
        cap = scheme_depth_cap(inst.m, eps)
        out = solve_unrelated(inst, eps, selection=Selection.BFS, depth_cap=cap)
        assert out.result.max_depth <= cap
        assert out.makespan <= (1 + eps) * opt


def test_lr_bounding_and_bm_rounding_run():
    eps = rat(1, 2)
    inst = generate("scheduling-unrelated", 6, 3, 123)
    opt = exact_opt(inst).optimum
    for bounding in ("BS", "LR"):
        for rounding in (ROUNDING_AS, ROUNDING_BM):
            for sel in (Selection.BEST_FIRST, Selection.DFS, Selection.BFS):
                adapter = UnrelatedAdapter(inst, bounding=bounding, rounding=rounding)
                result = run(adapter, sel, Criterion("ratio-eps", eps), node_limit=2000)
                assert schedule_makespan(inst, result.best_solution) == result.best_value
                assert result.best_value >= opt


def test_vertex_structure_on_random_instances():
    # <= m fractional jobs and a saturating machine matching (Hall check)
    for seed in range(40):
        inst = generate("scheduling-unrelated", 8, 3, 300 + seed)
        res = min_feasible_T(inst.processing, inst.overheads, range(inst.n))
        assert len(res.point.fractional_jobs) <= inst.m
        graph = fractional_graph(res.point.x, inst.m)
        matching = job_machine_matching(graph)
        assert matching is not None
        assert sorted(matching) == sorted(graph.jobs)


def test_identical_instance_through_unrelated_adapter():
    inst = SchedulingInstance(
        IDENTICAL, P332, T00, (rat(3), rat(3), rat(2)), (rat(1), rat(1))
    )
    out = solve_unrelated(inst, rat(1))
    assert out.makespan == 5  # reaches the optimum here
    assert out.result.termination == "ratio-met"
