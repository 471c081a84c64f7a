"""Loss columns over pattern features.

Every loss term is a column ``c`` of a signed difference matrix. A column has
an optional "plus" pair ``(a, b)`` contributing ``(x_a - x_b)**2`` and an
optional "minus" pair contributing ``-(x_a - x_b)**2``, plus a target margin
``t``. The loss of a column is ``max(t - m . c, 0)**2``.

Pairwise losses put every dissimilar pair first (plus part, target L) and
every similar pair after them (minus part, target -U). Triplet losses carry
both parts and target 1.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ColumnSpace:
    t: np.ndarray
    pcol: np.ndarray
    pa: np.ndarray
    pb: np.ndarray
    mcol: np.ndarray
    ma: np.ndarray
    mb: np.ndarray
    n_samples: int
    kind: str = "pairwise"

    @property
    def n_cols(self):
        return len(self.t)

    @classmethod
    def from_pairs(cls, pairs):
        n, K = pairs.similar.shape
        anchors = np.repeat(np.arange(n), K)
        nd = n * K
        t = np.concatenate([np.full(nd, pairs.L), np.full(nd, -pairs.U)])
        return cls(t=t,
                   pcol=np.arange(nd), pa=anchors, pb=pairs.dissimilar.ravel(),
                   mcol=np.arange(nd, 2 * nd), ma=anchors, mb=pairs.similar.ravel(),
                   n_samples=n, kind="pairwise")

    @classmethod
    def from_triplets(cls, triplets, n_samples):
        triplets = np.asarray(triplets, dtype=np.int64).reshape(-1, 3)
        cols = np.arange(len(triplets))
        i, j, l = triplets.T
        return cls(t=np.ones(len(triplets)), pcol=cols, pa=i, pb=l,
                   mcol=cols, ma=i, mb=j, n_samples=n_samples, kind="triplet")

    def row_values(self, x):
        """Entries ``C[k, :]`` for one feature column ``x`` (length n_samples)."""
        v = np.zeros(self.n_cols)
        v[self.pcol] = (x[self.pa] - x[self.pb]) ** 2
        v[self.mcol] -= (x[self.ma] - x[self.mb]) ** 2
        return v

    def matrix(self, X):
        """Transposed design ``C^T`` with shape (n_cols, n_features) for ``X`` (n x f)."""
        X = np.asarray(X, dtype=float)
        Ct = np.zeros((self.n_cols, X.shape[1]))
        Ct[self.pcol] += (X[self.pa] - X[self.pb]) ** 2
        Ct[self.mcol] -= (X[self.ma] - X[self.mb]) ** 2
        return Ct


def c_row_dot(columns, x, q):
    """``C[k, :] @ q`` for the feature column ``x``."""
    if len(x) != columns.n_samples or len(q) != columns.n_cols:
        raise ValueError(f"expected x of length {columns.n_samples} and q of length "
                         f"{columns.n_cols}, got {len(x)} and {len(q)}")
    dp = (x[columns.pa] - x[columns.pb]) ** 2
    dm = (x[columns.ma] - x[columns.mb]) ** 2
    return float(dp @ q[columns.pcol] - dm @ q[columns.mcol])


def c_row_norm(columns, x):
    return float(np.linalg.norm(columns.row_values(x)))


def learned_distance(m, f1, f2):
    """Weighted squared distance between two sparse feature dicts.

    ``m`` maps feature keys to non-negative weights; ``f1`` and ``f2`` map
    feature keys to values, absent keys meaning zero.
    """
    total = 0.0
    for key in set(f1) | set(f2):
        w = m.get(key, 0.0)
        if w:
            d = f1.get(key, 0.0) - f2.get(key, 0.0)
            total += w * d * d
    return total
