import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphmetric.features import ColumnSpace, c_row_dot, c_row_norm, learned_distance
from graphmetric.graphs import PairSystem
from graphmetric.solver import m_of_alpha
from oracles import dense_design


def small_pairs():
    # n = 3, K = 1
    return PairSystem(similar=np.array([[1], [0], [1]]),
                      dissimilar=np.array([[2], [2], [0]]), L=1.0, U=0.0)


def random_columns(rng, n, K=2, triplet=False):
    if triplet:
        trip = [(i, int(rng.integers(n)), int(rng.integers(n))) for i in range(n) for _ in range(K)]
        return ColumnSpace.from_triplets(trip, n)
    sim = rng.integers(0, n, (n, K))
    dis = rng.integers(0, n, (n, K))
    return ColumnSpace.from_pairs(PairSystem(sim, dis, 1.0, 0.25))


def test_column_layout():
    cols = ColumnSpace.from_pairs(small_pairs())
    assert cols.n_cols == 6
    assert list(cols.t) == [1, 1, 1, -0.0, -0.0, -0.0]
    assert list(cols.pcol) == [0, 1, 2] and list(cols.mcol) == [3, 4, 5]


def test_hand_fixture():
    cols = ColumnSpace.from_pairs(small_pairs())
    x = np.array([2.0, 0.5, 0.0])
    q = np.array([1.0, 2.0, 3.0, 0.5, 1.0, 4.0])
    # D pairs (0,2) (1,2) (2,0): 4, 0.25, 4 ; S pairs (0,1) (1,0) (2,1): 2.25, 2.25, 0.25
    expect = 1 * 4 + 2 * 0.25 + 3 * 4 - (0.5 * 2.25 + 1 * 2.25 + 4 * 0.25)
    assert c_row_dot(cols, x, q) == pytest.approx(expect, abs=1e-12)
    assert c_row_dot(cols, x, np.zeros(6)) == 0.0


def test_constant_column_vanishes():
    cols = ColumnSpace.from_pairs(small_pairs())
    x = np.full(3, 0.7)
    assert c_row_dot(cols, x, np.arange(6.0)) == 0.0
    assert c_row_norm(cols, x) == 0.0


def test_dimension_mismatch():
    cols = ColumnSpace.from_pairs(small_pairs())
    with pytest.raises(ValueError):
        c_row_dot(cols, np.zeros(3), np.zeros(5))
    with pytest.raises(ValueError):
        c_row_dot(cols, np.zeros(4), np.zeros(6))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 10), st.booleans())
def test_sparse_matches_dense(seed, n, triplet):
    rng = np.random.default_rng(seed)
    cols = random_columns(rng, n, triplet=triplet)
    X = rng.random((n, 4)) * (rng.random((n, 4)) < 0.6)
    Ct = dense_design(cols, X)
    assert np.allclose(cols.matrix(X), Ct, atol=1e-14)
    q = rng.random(cols.n_cols)
    for k in range(4):
        assert abs(c_row_dot(cols, X[:, k], q) - Ct[:, k] @ q) <= 1e-12
        assert c_row_norm(cols, X[:, k]) == pytest.approx(np.linalg.norm(Ct[:, k]), abs=1e-12)
    lam = 0.3
    m_rows = [max(c_row_dot(cols, X[:, k], q) - lam, 0.0) / lam for k in range(4)]
    assert np.allclose(m_rows, m_of_alpha(Ct, q, lam, 1.0), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_binary_norm_counts_disagreements(seed):
    rng = np.random.default_rng(seed)
    cols = random_columns(rng, 8)
    x = rng.integers(0, 2, 8).astype(float)
    disagree = sum(x[a] != x[b] for a, b in zip(cols.pa, cols.pb)) + \
        sum(x[a] != x[b] for a, b in zip(cols.ma, cols.mb))
    assert c_row_norm(cols, x) ** 2 == pytest.approx(disagree)


def test_learned_distance_examples():
    m = {"k1": 2.0, "k2": 1.0}
    assert learned_distance(m, {"k1": 1, "k2": 1}, {"k2": 1}) == 2.0
    assert learned_distance({}, {"k1": 3}, {}) == 0.0
    f = {"k1": 0.4, "k3": 2.0}
    assert learned_distance(m, f, f) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.integers(0, 5), st.floats(0, 10), max_size=5),
       st.dictionaries(st.integers(0, 5), st.floats(0, 10), max_size=5),
       st.dictionaries(st.integers(0, 5), st.floats(0, 10), max_size=5))
def test_learned_distance_symmetric_nonnegative(m, f, g):
    d = learned_distance(m, f, g)
    assert d >= 0
    assert d == pytest.approx(learned_distance(m, g, f))
