import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphmetric.features import ColumnSpace
from graphmetric.graphs import PairSystem
from graphmetric.postprocess import (knn_predict, learn_full_mahalanobis, mahalanobis_objective,
                                     micro_f1, project_psd, transform_features,
                                     write_embedding_csv)
from graphmetric.solver import primal_objective
from oracles import brute_knn, dense_design, oracle_solve


def random_system(seed, n=12, h=4, K=2):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    sim = np.array([[j for j in range(n) if j != i and y[j] == y[i]][:K] for i in range(n)])
    dis = np.array([[j for j in range(n) if y[j] != y[i]][:K] for i in range(n)])
    cols = ColumnSpace.from_pairs(PairSystem(sim, dis, 1.0, 0.0))
    Z = rng.random((n, h)) * (rng.random((n, h)) < 0.7)
    return cols, Z, y


def diag_objective(cols, Z, m, lam):
    return primal_objective(dense_design(cols, Z), cols.t, m, lam, 1.0)


def test_diagonal_start_reproduces_diagonal_loss():
    cols, Z, _ = random_system(0)
    m = np.array([0.2, 0.0, 1.3, 0.4])
    res = learn_full_mahalanobis(cols, Z, 0.5, m=m, max_iter=0)
    assert res.objectives[0] == pytest.approx(diag_objective(cols, Z, m, 0.5), rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_psd_and_descent(seed):
    cols, Z, _ = random_system(seed)
    lam = 0.3
    m = oracle_solve(dense_design(cols, Z), cols.t, lam)
    res = learn_full_mahalanobis(cols, Z, lam, m=m)
    assert min(res.min_eigenvalues) >= -1e-9
    assert all(b <= a + 1e-12 for a, b in zip(res.objectives, res.objectives[1:]))
    assert res.objectives[-1] <= diag_objective(cols, Z, m, lam) + 1e-12
    w = np.linalg.eigvalsh(res.M)
    assert w.min() >= -1e-9 and np.allclose(res.M, res.M.T)


def test_large_lambda_drives_to_zero():
    cols, Z, _ = random_system(1)
    res = learn_full_mahalanobis(cols, Z, 1e6, m=np.ones(4))
    assert np.abs(res.M).max() < 1e-8


def test_one_dimension_matches_diagonal_solver():
    cols, Z, _ = random_system(2, h=1)
    lam = 0.2
    m = oracle_solve(dense_design(cols, Z), cols.t, lam)
    res = learn_full_mahalanobis(cols, Z, lam, max_iter=5000, tol=1e-15)
    assert res.M[0, 0] == pytest.approx(m[0], abs=1e-6)


def test_projection():
    M = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
    P = project_psd(M)
    assert np.allclose(P, 1.5 * np.ones((2, 2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_transform_distance_identity(seed):
    rng = np.random.default_rng(seed)
    h = int(rng.integers(1, 6))
    B = rng.normal(size=(h, int(rng.integers(1, h + 1))))
    M = B @ B.T
    X = rng.normal(size=(6, h))
    E = transform_features(X, M=M)
    for i in range(6):
        for j in range(6):
            d = X[i] - X[j]
            assert abs(((E[i] - E[j]) ** 2).sum() - d @ M @ d) <= 1e-9 * max(1, d @ M @ d)
    m = rng.random(h)
    Ed = transform_features(X, m=m)
    assert np.allclose(((Ed[0] - Ed[1]) ** 2).sum(), ((X[0] - X[1]) ** 2 * m).sum())


def test_transform_special_cases():
    X = np.arange(6.0).reshape(2, 3)
    assert transform_features(X, M=np.zeros((3, 3))).shape == (2, 0)
    D = np.diag([4.0, 0.0, 9.0])
    E = transform_features(X, M=D)
    assert np.allclose(np.sort(np.abs(E), axis=1), np.sort(np.abs(X[:, [0, 2]] * [2, 3]), axis=1))
    with pytest.raises(ValueError):
        transform_features(X)


def test_knn_examples():
    Z = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
    y = np.array([0, 0, 1, 1, 1])
    assert list(knn_predict(Z, y, Z[[2]], 1)) == [1]
    q = np.array([[1.4], [9.0], [5.9]])
    assert list(knn_predict(Z, y, q, 3)) == list(brute_knn(Z, y, q, 3))
    assert micro_f1(y, y) == 1.0
    with pytest.raises(ValueError):
        knn_predict(Z, y, q, 6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 9))
def test_knn_brute_force(seed, k):
    rng = np.random.default_rng(seed)
    Z = rng.integers(0, 3, (10, 2)).astype(float)  # many distance ties
    y = rng.integers(0, 3, 10)
    Q = rng.integers(0, 3, (5, 2)).astype(float)
    assert list(knn_predict(Z, y, Q, k)) == list(brute_knn(Z, y, Q, k))


def test_embedding_csv(tmp_path):
    write_embedding_csv(tmp_path / "e.csv", np.eye(2), y=[0, 1])
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "id,label,dim0,dim1" and lines[1] == "0,0,1.0,0.0"


def test_objective_at_zero():
    cols, Z, _ = random_system(3)
    P, _ = mahalanobis_objective(cols, Z, np.zeros((4, 4)), 1.0)
    assert P == cols.n_cols // 2
