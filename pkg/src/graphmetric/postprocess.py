"""Refinement on selected features, explicit embeddings and k-NN evaluation."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

EIG_KEEP = 1e-9


def project_psd(M):
    """Nearest PSD matrix in Frobenius norm (symmetrise, clip negative eigenvalues)."""
    S = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(S)
    w = np.maximum(w, 0.0)
    return (V * w) @ V.T


def _pair_diffs(columns, Z):
    return Z[columns.pa] - Z[columns.pb], Z[columns.ma] - Z[columns.mb]


def mahalanobis_objective(columns, Z, M, lam, eta=1.0, _diffs=None):
    Dp, Dm = _diffs if _diffs is not None else _pair_diffs(columns, Z)
    z = np.zeros(columns.n_cols)
    z[columns.pcol] = np.einsum("ij,jk,ik->i", Dp, M, Dp)
    z[columns.mcol] -= np.einsum("ij,jk,ik->i", Dm, M, Dm)
    r = np.maximum(columns.t - z, 0.0)
    return float(r @ r + lam * (np.trace(M) + 0.5 * eta * np.sum(M * M))), r


@dataclass
class MahalanobisResult:
    M: np.ndarray
    objectives: list = field(default_factory=list)
    min_eigenvalues: list = field(default_factory=list)
    iterations: int = 0


def learn_full_mahalanobis(columns, Z, lam, m=None, eta=1.0, max_iter=500, tol=1e-9):
    """Fit a full PSD matrix on the selected features ``Z`` (n x h).

    Starts from ``diag(m)`` (zeros when ``m`` is None), so the first
    objective equals the diagonal model's. Projected gradient with
    backtracking keeps every iterate PSD and the objective non-increasing.
    """
    Z = np.asarray(Z, dtype=float)
    h = Z.shape[1]
    M = np.diag(np.asarray(m, dtype=float)) if m is not None else np.zeros((h, h))
    diffs = _pair_diffs(columns, Z)
    Dp, Dm = diffs
    P, r = mahalanobis_objective(columns, Z, M, lam, eta, diffs)
    res = MahalanobisResult(M, [P], [float(np.linalg.eigvalsh(M).min()) if h else 0.0])
    gamma = 1.0
    for it in range(max_iter):
        alpha = 2.0 * r
        ap, am = alpha[columns.pcol], alpha[columns.mcol]
        G = -(Dp.T * ap) @ Dp + (Dm.T * am) @ Dm + lam * (np.eye(h) + eta * M)
        while True:
            M_new = project_psd(M - gamma * G)
            d = M_new - M
            P_new, r_new = mahalanobis_objective(columns, Z, M_new, lam, eta, diffs)
            if P_new <= P + np.sum(G * d) + np.sum(d * d) / (2.0 * gamma) + 1e-15 * abs(P):
                break
            gamma *= 0.5
            if gamma < 1e-300:
                break
        if P_new > P:
            break
        M, r = M_new, r_new
        decrease = P - P_new
        P = P_new
        res.objectives.append(P)
        res.min_eigenvalues.append(float(np.linalg.eigvalsh(M).min()) if h else 0.0)
        res.iterations = it + 1
        gamma = min(2.0 * gamma, 1.0)
        if decrease <= tol * max(P, 1.0):
            break
    res.M = M
    return res


def transform_features(X, m=None, M=None):
    """Embed samples so that Euclidean distance reproduces the learned metric.

    Diagonal mode (``m``): ``sqrt(m) * x``. Full mode (``M``):
    ``x V sqrt(L)`` over eigenpairs with eigenvalue above ``1e-9``.
    """
    X = np.asarray(X, dtype=float)
    if (m is None) == (M is None):
        raise ValueError("pass exactly one of m (diagonal) or M (full)")
    if m is not None:
        return X * np.sqrt(np.asarray(m, dtype=float))
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    keep = w > EIG_KEEP
    return X @ (V[:, keep] * np.sqrt(w[keep]))


def knn_predict(Z_train, y_train, Z_query, k, exclude_self=False):
    """Majority vote of the ``k`` nearest training samples.

    Neighbours are ordered by squared distance, then index. Vote ties go to
    the class with the smaller summed distance, then the smaller label.
    ``exclude_self`` drops the query's own row when querying the training set.
    """
    Z_train = np.asarray(Z_train, dtype=float)
    Z_query = np.asarray(Z_query, dtype=float)
    y_train = np.asarray(y_train)
    available = len(Z_train) - (1 if exclude_self else 0)
    if not 1 <= k <= available:
        raise ValueError(f"k={k} needs between 1 and {available} training samples")
    sq_t = (Z_train ** 2).sum(1)
    preds = np.empty(len(Z_query), dtype=y_train.dtype)
    idx = np.arange(len(Z_train))
    for q, z in enumerate(Z_query):
        d = np.maximum(sq_t - 2.0 * Z_train @ z + z @ z, 0.0)
        if exclude_self:
            d[q] = np.inf
        order = np.lexsort((idx, d))[:k]
        votes = {}
        for i in order:
            c, s = votes.get(y_train[i], (0, 0.0))
            votes[y_train[i]] = (c + 1, s + d[i])
        preds[q] = min(votes.items(), key=lambda kv: (-kv[1][0], kv[1][1], kv[0]))[0]
    return preds


def micro_f1(y_true, y_pred):
    """Micro-averaged F1, which for single-label classification is accuracy."""
    y_true = np.asarray(y_true)
    if len(y_true) == 0:
        return math.nan
    return float(np.mean(y_true == np.asarray(y_pred)))


def write_embedding_csv(path, Z, y=None, ids=None):
    Z = np.asarray(Z, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + (["label"] if y is not None else [])
                   + [f"dim{j}" for j in range(Z.shape[1])])
        for i, row in enumerate(Z):
            lead = [ids[i] if ids is not None else i] + ([y[i]] if y is not None else [])
            w.writerow(lead + [repr(float(v)) for v in row])
