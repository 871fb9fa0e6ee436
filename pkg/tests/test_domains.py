import itertools

import numpy as np
import pytest

from robsub.cascade import exact_spread
from robsub.domains import (BudgetAllocInstance, BudgetAllocObjective,
                            ProfitUncertaintySet, budget_family,
                            budget_objective, influence_set_objective,
                            make_adversarial_instance, make_random_instance)
from robsub.equator import double_oracle_solve, worst_case_value, MixedStrategy
from robsub.errors import ParameterError
from robsub.graphs import CascadeConfig, EdgeParams, Graph
from robsub.submod import CardinalityConstraint, greedy_maximize

from oracles import exact_multilinear


def test_budget_objective_arithmetic():
    inst = BudgetAllocInstance(np.array([[0.5]]), np.array([2.0]), budget=1)
    assert budget_objective(inst, [2.0], {0}) == pytest.approx(1.0)
    assert budget_objective(inst, [2.0], set()) == 0.0


def test_budget_instance_validation():
    with pytest.raises(ParameterError):
        BudgetAllocInstance(np.array([[1.5]]), np.array([1.0]), 1)
    with pytest.raises(ParameterError):
        BudgetAllocInstance(np.array([[0.5]]), np.array([-1.0]), 1)
    with pytest.raises(ParameterError):
        ProfitUncertaintySet([])


def test_budget_objective_monotone_submodular_exhaustive():
    rng = np.random.default_rng(2)
    for trial in range(5):
        L, R = 5, 6
        P = rng.random((L, R)) * (rng.random((L, R)) < 0.6)
        w = rng.random(R) * 2
        inst = BudgetAllocInstance(P, w, budget=L)
        f = BudgetAllocObjective(inst, w)
        vals = {frozenset(S): f.value(S)
                for r in range(L + 1) for S in itertools.combinations(range(L), r)}
        for A in vals:
            for B in vals:
                if not A <= B:
                    continue
                assert vals[B] >= vals[A] - 1e-12
                for i in range(L):
                    if i in B:
                        continue
                    ga = vals[A | {i}] - vals[A]
                    gb = vals[B | {i}] - vals[B]
                    assert ga >= gb - 1e-9


def test_budget_batch_matches_exact():
    rng = np.random.default_rng(3)
    P = rng.random((8, 10)) * 0.9
    P[0, 0] = 1.0  # sure activation handled by both paths
    w = rng.random(10)
    inst = BudgetAllocInstance(P, w, budget=4)
    f = BudgetAllocObjective(inst, w)
    mat = rng.random((40, 8)) < 0.4
    vb = f.value_batch(mat)
    ve = np.array([f.value(set(np.nonzero(r)[0].tolist())) for r in mat])
    assert np.allclose(vb, ve, atol=1e-9)


def test_budget_exact_multilinear_against_enumeration():
    rng = np.random.default_rng(4)
    P = rng.random((6, 7)) * 0.8
    w = rng.random(7)
    inst = BudgetAllocInstance(P, w, budget=3)
    f = BudgetAllocObjective(inst, w)
    x = rng.random(6)
    assert f.exact_multilinear(x) == pytest.approx(exact_multilinear(f, x), abs=1e-10)
    # gradient vs finite differences of the enumeration oracle
    g = f.exact_multilinear_grad(x)
    h = 1e-5
    for i in range(6):
        hi = x.copy(); hi[i] += h
        lo = x.copy(); lo[i] -= h
        fd = (exact_multilinear(f, hi) - exact_multilinear(f, lo)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-5)


def test_make_random_instance_deterministic():
    a_inst, a_unc = make_random_instance(10, 12, 0.3, 3, 5, 77)
    b_inst, b_unc = make_random_instance(10, 12, 0.3, 3, 5, 77)
    assert np.array_equal(a_inst.probs, b_inst.probs)
    assert all(np.array_equal(x, y)
               for x, y in zip(a_unc.weight_vectors, b_unc.weight_vectors))
    assert a_unc.m == 5


def test_zero_density_zero_objective():
    inst, unc = make_random_instance(6, 8, 0.0, 2, 3, 5)
    f = BudgetAllocObjective(inst, unc.weight_vectors[0])
    assert f.value({0, 1, 2}) == 0.0


def test_single_member_family_degenerates_to_greedy():
    inst, unc = make_random_instance(12, 15, 0.3, 4, 1, 9)
    fam = budget_family(inst, unc)
    assert fam.m == 1
    c = CardinalityConstraint(4)
    res = double_oracle_solve(fam, c)
    S = greedy_maximize(fam.members[0], c)
    assert res.value == pytest.approx(fam.members[0].value(S))


def test_adversarial_instance_structure():
    inst, unc = make_adversarial_instance(8, budget=3)
    fam = budget_family(inst, unc)
    c = CardinalityConstraint(3)
    S = greedy_maximize(fam.mean_objective(), c)
    assert worst_case_value(MixedStrategy.pure(S), fam) == 0.0
    res = double_oracle_solve(fam, c, tol=1e-8, max_iters=100)
    assert res.value == pytest.approx(3 / 8, abs=1e-6)


def test_influence_objective_contract():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    p0 = EdgeParams.uniform(g, 0.0)
    f = influence_set_objective(g, p0, 2, 50)
    assert f.value({0, 2}, rng_seed=1) == pytest.approx(2.0)  # p=0 -> |S|
    assert f.value(set(), rng_seed=1) == 0.0
    p = EdgeParams.uniform(g, 0.5)
    f = influence_set_objective(g, p, 2, 20000)
    want = exact_spread(g, p, CascadeConfig.single([1], 2))
    assert f.exact_value({1}) == pytest.approx(want)
    got = f.value({1}, rng_seed=3)
    assert abs(got - want) < 0.1  # well within 3 sigma at 20k samples


def test_influence_objective_no_exact_over_cap():
    g = Graph(30, [(i, i + 1) for i in range(29)])
    f = influence_set_objective(g, EdgeParams.uniform(g, 0.3), 2, 10)
    assert not f.has_exact
