import math

import numpy as np
import pytest

from graphmetric.features import ColumnSpace
from graphmetric.graphs import PairSystem, wl_subtree_kernel
from graphmetric.mining import GraphPatternTree
from graphmetric.solver import (PathConfig, SolverDivergenceError, alpha_of_m,
                                build_triplet_system, compute_lambda_max, dual_objective,
                                m_of_alpha, pathwise_optimize, primal_objective,
                                solve_subproblem, traverse)
from oracles import dense_design, kkt_violation, oracle_solve
from problems import make_problem


@pytest.fixture(scope="module")
def prob():
    return make_problem(8, n=16, max_vertices=6, maxpat=3)


def toy_columns(U=0.2):
    # n = 2, K = 1; both loss terms compare samples 0 and 1
    return ColumnSpace.from_pairs(PairSystem(np.array([[1], [0]]), np.array([[1], [0]]), 1.0, U))


# objectives -----------------------------------------------------------------

def test_primal_at_zero(prob):
    nK = prob.columns.n_cols // 2
    assert primal_objective(prob.Ct, prob.columns.t, np.zeros(prob.Ct.shape[1]), 1.0, 1.0) == nK


def test_primal_toy_hand_value():
    cols = toy_columns()
    Ct = cols.matrix(np.array([[1.0], [0.0]]))
    # D residuals 1 - 0.5, S residuals -0.2 + 0.5; regulariser 0.5 + 0.125
    assert primal_objective(Ct, cols.t, np.array([0.5]), 1.0, 1.0) == pytest.approx(
        2 * 0.25 + 2 * 0.09 + 0.625)


def test_constant_feature_only_adds_regulariser(prob):
    Ct = np.column_stack([prob.Ct, np.zeros(prob.columns.n_cols)])
    m = np.zeros(Ct.shape[1])
    m[0] = 0.3
    base = primal_objective(Ct, prob.columns.t, m, 2.0, 0.5)
    m[-1] = 0.7
    assert primal_objective(Ct, prob.columns.t, m, 2.0, 0.5) - base == pytest.approx(
        2.0 * 0.7 + 2.0 * 0.5 * 0.7 ** 2 / 2)


def test_primal_rejects_negative_weights(prob):
    m = np.zeros(prob.Ct.shape[1])
    m[0] = -1
    with pytest.raises(ValueError):
        primal_objective(prob.Ct, prob.columns.t, m, 1.0, 1.0)


def test_dual_special_points(prob):
    Ct, t = prob.Ct, prob.columns.t
    assert dual_objective(Ct, t, np.zeros_like(t), 1.0, 1.0) == 0.0
    a0 = alpha_of_m(Ct, t, np.zeros(Ct.shape[1]))
    nK = len(t) // 2
    assert list(a0) == [2.0] * nK + [0.0] * nK
    lam_max = (Ct.T @ a0).max()
    assert not m_of_alpha(Ct, a0, lam_max, 1.0).any()
    assert dual_objective(Ct, t, a0, lam_max, 1.0) == pytest.approx(nK)


def test_weak_duality(prob):
    rng = np.random.default_rng(0)
    Ct, t = prob.Ct, prob.columns.t
    for _ in range(50):
        lam = rng.exponential(2.0)
        m = rng.exponential(0.1, Ct.shape[1]) * (rng.random(Ct.shape[1]) < 0.3)
        a = rng.exponential(1.0, len(t))
        assert dual_objective(Ct, t, a, lam, 1.0) <= primal_objective(Ct, t, m, lam, 1.0) + 1e-12


def test_alpha_of_m_hinge():
    cols = toy_columns(U=0.0)
    Ct = cols.matrix(np.array([[1.0], [0.0]]))
    assert list(alpha_of_m(Ct, cols.t, np.array([0.25]))[:2]) == [1.5, 1.5]  # 2 (L - d)
    assert list(alpha_of_m(Ct, cols.t, np.array([1.5]))[:2]) == [0.0, 0.0]   # d >= L


# lambda max -----------------------------------------------------------------

@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lambda_max_is_exhaustive_maximum_and_tight(seed):
    p = make_problem(seed, n=14, max_vertices=5, maxpat=4)
    a0 = 2.0 * np.maximum(p.columns.t, 0)
    lam_max, node, visited = compute_lambda_max(p.tree, p.columns)
    assert lam_max == pytest.approx((p.Ct.T @ a0).max(), rel=1e-12)
    assert visited <= len(p.nodes)
    assert not oracle_solve(p.Ct, p.columns.t, 1.0001 * lam_max).any()
    assert oracle_solve(p.Ct, p.columns.t, 0.99 * lam_max).any()


def test_working_set_empty_at_lambda_max(prob):
    a0 = 2.0 * np.maximum(prob.columns.t, 0)
    lam_max, _, _ = compute_lambda_max(prob.tree, prob.columns)
    assert traverse(prob.tree, prob.columns, lam_max, a0, "wsp").nodes == []


# traversal ------------------------------------------------------------------

def test_refresh_matches_full_scan(prob):
    rng = np.random.default_rng(1)
    for _ in range(10):
        a = rng.exponential(1.0, prob.columns.n_cols)
        lam = rng.uniform(0.2, 1.0) * (prob.Ct.T @ a).max()
        walk = traverse(prob.tree, prob.columns, lam, a, "wsp")
        scan = {n.id for n, s in zip(prob.nodes, prob.Ct.T @ a) if s > lam}
        assert {n.id for n in walk.nodes} == scan


@pytest.mark.parametrize("rules", ["ssp", "rssp"])
def test_safe_walk_covers_optimal_support(prob, rules):
    Ct, t = prob.Ct, prob.columns.t
    lam0 = 0.5 * compute_lambda_max(prob.tree, prob.columns)[0]
    lam = 0.8 * lam0
    a0 = alpha_of_m(Ct, t, oracle_solve(Ct, t, lam0))
    prob.tree.reset_caches()
    walk = traverse(prob.tree, prob.columns, lam, a0, rules, lam0=lam0, update=True)
    m_opt = oracle_solve(Ct, t, lam)
    support = {n.id for n, w in zip(prob.nodes, m_opt) if w > 0}
    assert support <= {n.id for n in walk.nodes}
    prob.tree.reset_caches()


# sub-problem ----------------------------------------------------------------

def test_empty_working_set(prob):
    res = solve_subproblem(np.zeros((prob.columns.n_cols, 0)), prob.columns.t, 1.0)
    assert res.m.size == 0 and res.primal == prob.columns.n_cols // 2 and res.converged


def test_above_lambda_max_gives_zero(prob):
    lam_max = compute_lambda_max(prob.tree, prob.columns)[0]
    res = solve_subproblem(prob.Ct, prob.columns.t, 1.0001 * lam_max,
                           m0=np.full(prob.Ct.shape[1], 0.1))
    assert not res.m.any()


def test_dynamic_screening_is_safe(prob):
    Ct, t = prob.Ct, prob.columns.t
    lam = 0.3 * compute_lambda_max(prob.tree, prob.columns)[0]
    res = solve_subproblem(Ct, t, lam, freq=1, eps=1e-10)
    assert res.screened > 0
    m_opt = oracle_solve(Ct, t, lam)
    assert np.abs(res.m - m_opt).max() < 1e-4
    assert kkt_violation(Ct, t, res.m, lam) < 1e-3


def test_objective_never_increases(prob):
    Ct, t = prob.Ct, prob.columns.t
    lam = 0.2 * compute_lambda_max(prob.tree, prob.columns)[0]
    values = [solve_subproblem(Ct, t, lam, freq=10 ** 9, max_iter=k, eps=1e-300).primal
              for k in range(0, 60, 3)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_divergence_is_reported(prob):
    m0 = np.zeros(prob.Ct.shape[1])
    m0[0] = np.inf
    with pytest.raises(SolverDivergenceError), np.errstate(invalid="ignore"):
        solve_subproblem(prob.Ct, prob.columns.t, 1.0, m0=m0)


# path -----------------------------------------------------------------------

def test_path_config_defaults_and_validation():
    cfg = PathConfig()
    assert cfg.n_lambdas == 100 and cfg.freq == 10 and cfg.max_iter == 10000 and cfg.eps == 1e-6
    assert cfg.R == pytest.approx(0.01 ** (1 / 99))
    with pytest.raises(ValueError):
        PathConfig(eta=0.0)
    with pytest.raises(ValueError):
        PathConfig(R=1.5)
    with pytest.raises(ValueError):
        PathConfig(rules="none")


def test_single_point_grid(prob):
    res = pathwise_optimize(prob.tree, prob.columns, PathConfig(n_lambdas=1))
    assert len(res.lambdas) == 1 and res.weights == [{}]


@pytest.mark.parametrize("rules", ["ssp", "rssp", "wsp", "wsp+rssp"])
def test_path_matches_oracle(prob, rules):
    prob.tree.reset_caches()
    res = pathwise_optimize(prob.tree, prob.columns, PathConfig(n_lambdas=8, eps=1e-12, rules=rules))
    ids = [n.id for n in prob.nodes]
    for i, lam in enumerate(res.lambdas):
        m = np.array([res.weights[i].get(k, 0.0) for k in ids])
        assert np.abs(m - oracle_solve(prob.Ct, prob.columns.t, lam)).max() <= 1e-5
        assert res.stats[i]["relative_gap"] <= 1e-12
        assert math.isfinite(res.stats[i]["refreshes"])
    prob.tree.reset_caches()


def test_triplet_columns_and_solve():
    p = make_problem(9, n=12, max_vertices=6, maxpat=3, loss="triplet")
    cols = p.columns
    assert set(cols.t) == {1.0}
    X = np.random.default_rng(0).random((12, 2))
    Ct = cols.matrix(X)
    for c, (i, j) in enumerate(zip(cols.ma, cols.mb)):
        l = cols.pb[c]
        assert np.allclose(Ct[c], (X[i] - X[l]) ** 2 - (X[i] - X[j]) ** 2)
    same = cols.matrix(np.ones((12, 2)))
    assert not same.any()
    res = pathwise_optimize(p.tree, cols, PathConfig(n_lambdas=6, eps=1e-12))
    ids = [n.id for n in p.nodes]
    for i, lam in enumerate(res.lambdas):
        m = np.array([res.weights[i].get(k, 0.0) for k in ids])
        assert np.abs(m - oracle_solve(p.Ct, cols.t, lam)).max() <= 1e-5


def test_build_triplet_system():
    p = make_problem(10, n=12, max_vertices=5, maxpat=2)
    cols = build_triplet_system(wl_subtree_kernel(p.graphs), p.y, k_trip=2)
    assert cols.kind == "triplet" and cols.n_cols == 12 * 4
    assert np.allclose(dense_design(cols, np.eye(12)), cols.matrix(np.eye(12)))
