import itertools
import time

import numpy as np
import pytest

from tsrcmdp.bellman import (approx_bellman_update, approx_solve, diff_solve, exact_inner_min,
                             input_sets)
from tsrcmdp.core import INF, CMdp, CriterionKind, make_criterion
from tsrcmdp.exact_cover import ValueSpace, solve_exact, value_space
from tsrcmdp.oracle import GeneratorSpec, random_cmdp
from tsrcmdp.policy import Variant
from tsrcmdp.rounding import AdditiveGrid, IdentityGrid, RelativeGrid, build_grid

from conftest import chain

KINDS = list(CriterionKind)


def test_input_sets_identity_example():
    m = chain([1.0, 0.0])
    U = input_sets(0, 0, 0, IdentityGrid([0.0, 1.0], 1), m)
    assert list(U[0]) == [1.0] and list(U[1]) == [1.0, 2.0]


def test_input_sets_zero_probability_step_is_rounding_only():
    P = np.zeros((1, 2, 1, 2))
    P[0, :, 0, 1] = 1.0
    m = CMdp(P, np.full((1, 2, 1), 0.7), np.zeros((1, 2, 1)))
    g = AdditiveGrid(0.5, -2, 2, 2)
    U = input_sets(0, 0, 0, g, m)
    assert list(U[1]) == [0.5]
    assert set(U[2]) == {0.5 + v for v in g.values(g.demand_keys())}


def test_additive_step_example():
    g = AdditiveGrid(0.5, -4, 4, 1)
    key = g.sum_step(g.coords([2]), 0.5, np.array([3]))[0, 0]
    assert g.values(key) == 1.5


def test_relative_difference_negative_goes_to_zero_point():
    g = RelativeGrid(0.5, 1.0, 16.0, 1)
    key = g.diff_step(g.coords([1]), 1.0, np.array([3]))[0, 0]
    assert key == -1 and g.values(key) == 0.0


def vspace_of(values):
    return ValueSpace((), np.array(sorted(values), dtype=float))


def test_exact_inner_min_picks_only_feasible_demand():
    m = chain([0.0, 0.0])
    vs = vspace_of([0.0, 1.0, 2.0, 3.0])
    C_next = np.array([[0.0, 0.0, 0.0, INF]])
    vec, cost = exact_inner_min(0, 0, 2.0, 0, C_next, vs, m, make_criterion("expectation"))
    assert list(vec) == [2.0] and cost == 0


def test_exact_inner_min_infeasible_target():
    m = chain([0.0, 0.0])
    vs = vspace_of([0.0, 1.0, 2.0, 3.0])
    C_next = np.array([[0.0, 0.0, 0.0, INF]])
    _, cost = exact_inner_min(0, 0, 3.0, 0, C_next, vs, m, make_criterion("expectation"))
    assert cost == INF


def two_successor(p=0.5):
    P = np.zeros((2, 2, 1, 2))
    P[0, 0, 0] = [p, 1 - p]
    P[0, 1, 0, 1] = 1
    P[1, :, 0, 0] = 1
    return CMdp(P, np.zeros((2, 2, 1)), np.zeros((2, 2, 1)))


def test_exact_inner_min_matches_pair_enumeration():
    m = two_successor(0.25)
    crit = make_criterion("expectation")
    V = [0.0, 1.0, 2.0, 4.0]
    vs = vspace_of(V)
    C_next = np.array([[0.0, 1.0, 2.0, 5.0], [0.0, 0.5, 3.0, INF]])
    for v in V + [0.5, 3.0]:
        _, cost = exact_inner_min(0, 0, v, 0, C_next, vs, m, crit)
        best = INF
        for i, j in itertools.product(range(4), repeat=2):
            if 0.25 * V[i] + 0.75 * V[j] >= v:
                best = min(best, 0.25 * C_next[0, i] + 0.75 * C_next[1, j])
        assert cost == best


def test_knapsack_inside_one_update():
    # Successor t may be asked for 0 (free) or 4 * value_t (costs 4 * weight_t).
    weights, values = [3, 1, 4, 2], [2, 1, 3, 2]
    n = len(weights)
    P = np.zeros((1, n, 1, n))
    P[0, :, 0, :] = 1.0 / n
    m = CMdp(P, np.zeros((1, n, 1)), np.zeros((1, n, 1)))
    V = sorted({0.0} | {float(n * v) for v in values})
    C_next = np.array([[0.0 if x <= 0 else (n * w if x <= n * v else INF) for x in V]
                       for w, v in zip(weights, values)])
    crit = make_criterion("expectation")
    for target in range(0, sum(values) + 2):
        _, cost = exact_inner_min(0, 0, float(target), 0, C_next, vspace_of(V), m, crit)
        best = min((sum(weights[i] for i in sub) for k in range(n + 1)
                    for sub in itertools.combinations(range(n), k)
                    if sum(values[i] for i in sub) >= target), default=INF)
        assert cost == best


def test_update_met_by_reward_alone():
    m = CMdp(np.ones((1, 1, 1, 1)), np.full((1, 1, 1), 3.0), np.full((1, 1, 1), 1.5))
    g = IdentityGrid([0.0, 1.0, 2.0], 1)
    crit = make_criterion("expectation")
    a, vec, cost = approx_bellman_update(0, 0, 2.0, np.zeros((1, 3)), g, m, crit, prune=False)
    assert (a, list(vec), cost) == (0, [0], 1.5)
    # With pruning only the largest demand of each cost level is a candidate.
    a, vec, cost = approx_bellman_update(0, 0, 2.0, np.zeros((1, 3)), g, m, crit)
    assert (a, list(vec), cost) == (0, [2], 1.5)


@pytest.mark.parametrize("kind", KINDS)
def test_identity_update_is_exact_update(kind):
    crit = make_criterion(kind)
    for seed in range(4):
        m = random_cmdp(GeneratorSpec(seed, 2, 2, 2))
        ex = solve_exact(m, crit, 0.0)
        g = ex.grid
        C = ex.cost_table
        for h, s in itertools.product(range(m.horizon), range(m.num_states)):
            for d, v in enumerate(g.demand_keys()):
                _, _, cost = approx_bellman_update(h, s, v, C[h + 1], g, m, crit)
                assert cost == C[h, s, d]


@pytest.mark.parametrize("kind", KINDS)
def test_additive_update_is_optimistic(kind):
    crit = make_criterion(kind)
    for seed in range(4):
        m = random_cmdp(GeneratorSpec(seed, 2, 2, 2))
        ex = solve_exact(m, crit, 0.0)
        grid = build_grid("additive", 0.5, m)
        _, Chat = approx_solve(m, crit, grid)
        for h, s in itertools.product(range(m.horizon + 1), range(m.num_states)):
            for d, v in enumerate(ex.grid.demand_keys()):
                k = grid.round_down(v).key - grid.k_lo
                assert Chat[h, s, k] <= ex.cost_table[h, s, d]


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("variant", ["sum", "diff"])
def test_identity_solvers_equal_exact_table(kind, variant, small_instances):
    crit = make_criterion(kind)
    run = approx_solve if variant == "sum" else diff_solve
    for m, B in small_instances:
        ex = solve_exact(m, crit, B)
        _, C = run(m, crit, ex.grid, B)
        assert np.array_equal(C, ex.cost_table)


def test_zero_costs_give_zero_entries():
    m = random_cmdp(GeneratorSpec(2, 2, 2, 3, cost_range=(0, 0)))
    for run in (approx_solve, diff_solve):
        _, C = run(m, make_criterion("expectation"), build_grid("additive", 0.5, m))
        assert np.all(C[np.isfinite(C)] == 0)


@pytest.mark.parametrize("scheme", ["additive", "relative"])
@pytest.mark.parametrize("variant", ["sum", "diff"])
def test_tables_monotone_and_consistent(scheme, variant):
    run = approx_solve if variant == "sum" else diff_solve
    for seed in range(4):
        m = random_cmdp(GeneratorSpec(seed, 3, 2, 3, transition_sparsity=0.67))
        for kind in KINDS:
            crit = make_criterion(kind)
            grid = build_grid(scheme, 0.5, m, difference=variant == "diff")
            pol, C = run(m, crit, grid)
            assert np.all(C[..., 1:] >= C[..., :-1])
            for h, s, d in zip(*np.nonzero(np.isfinite(C[:-1]))):
                a, vec = pol.entry(h, s, d)
                supp = m.support(h, s, a)
                again = m.costs[h, s, a] + crit.fold([m.transitions[h, s, a, t] for t in supp],
                                                     [C[h + 1, t, vec[t]] for t in supp])
                assert again == C[h, s, d]


def test_pruning_does_not_change_tables():
    for seed in range(3):
        m = random_cmdp(GeneratorSpec(seed, 2, 2, 2))
        for kind in KINDS:
            crit = make_criterion(kind)
            for grid in (build_grid("additive", 1.0, m), build_grid("relative", 0.5, m)):
                for run in (approx_solve, diff_solve):
                    _, a = run(m, crit, grid, prune=True)
                    _, b = run(m, crit, grid, prune=False)
                    assert np.array_equal(a, b)


def test_difference_variant_scales_better():
    m = random_cmdp(GeneratorSpec(3, 2, 2, 2))
    crit = make_criterion("expectation")
    ratios = []
    for eps in (4.0, 2.0, 1.0):
        grid = build_grid("additive", eps, m)
        times = {}
        for name, run in (("sum", approx_solve), ("diff", diff_solve)):
            best = INF
            for _ in range(3):
                t0 = time.perf_counter()
                run(m, crit, grid, prune=False)
                best = min(best, time.perf_counter() - t0)
            times[name] = best
        ratios.append(times["diff"] / times["sum"])
    assert ratios[0] > ratios[-1]
