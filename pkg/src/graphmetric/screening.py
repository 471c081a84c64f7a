"""Safe and heuristic screening rules for the pattern-weighted metric.

All rules work on a single feature column ``x`` (the pattern's value in every
training sample) together with the loss columns of a
:class:`~graphmetric.features.ColumnSpace`.

Sphere rules take a ball ``{a : ||a - q|| <= r}`` known to contain the
optimal dual variable. A feature is screened when ``C_k q + r ||C_k|| <= lam``
and its whole subtree is pruned when an upper bound on that quantity over all
super-patterns stays below ``lam``.
"""

import math

import numpy as np

from .features import c_row_dot

GAP_GUARD = 1e-12


def dgb(alpha, primal, dual):
    """Duality-gap ball: centre ``alpha``, radius ``2 sqrt(P - D)``."""
    gap = primal - dual
    if gap < -GAP_GUARD * max(1.0, abs(primal)):
        raise ValueError(f"negative duality gap {gap:g}; primal and dual are inconsistent")
    return np.asarray(alpha, dtype=float), 2.0 * math.sqrt(max(gap, 0.0))


def rrpb(alpha0, lam0, lam1, eps=0.0):
    """Ball around the dual optimum at ``lam1`` from an approximate solution at ``lam0``.

    ``eps`` bounds the distance between ``alpha0`` and the exact optimum at
    ``lam0``; with ``eps = 0`` this is the plain regularisation-path ball.
    """
    alpha0 = np.asarray(alpha0, dtype=float)
    scale = (lam0 + lam1) / (2.0 * lam0)
    shrink = abs(lam0 - lam1) / (2.0 * lam0)
    radius = shrink * np.linalg.norm(alpha0) + (scale + shrink) * eps
    return scale * alpha0, radius


def rpb(alpha0_opt, lam0, lam1):
    return rrpb(alpha0_opt, lam0, lam1, 0.0)


def sphere_score(columns, x, q, r):
    """``C_k q + r ||C_k||``."""
    v = columns.row_values(x)
    return float(v @ q + r * np.linalg.norm(v))


def ss_test(columns, x, q, r, lam):
    """True when the sphere proves the feature has zero optimal weight."""
    return sphere_score(columns, x, q, r) <= lam


def _check_q(q):
    if np.any(q < 0):
        raise ValueError("pruning criteria need a non-negative dual vector")


def prune_terms(columns, x, q, mode="general"):
    """Split the pruning criterion into ``(a, b)`` with ``Prune = a + r * b``.

    ``a`` is positively homogeneous in ``q``; ``b`` bounds the column norm of
    every super-pattern. ``mode='binary'`` uses the tighter bound valid for
    0/1 features with pairwise losses.
    """
    q = np.asarray(q, dtype=float)
    _check_q(q)
    xpa, xpb = x[columns.pa], x[columns.pb]
    xma, xmb = x[columns.ma], x[columns.mb]
    pmax = np.maximum(xpa, xpb)
    mmax = np.maximum(xma, xmb)

    if mode == "binary" and columns.kind == "pairwise":
        n = columns.n_samples
        qd = q[columns.pcol]
        qs = q[columns.mcol]
        A = np.bincount(columns.pa, qd * xpb, minlength=n)
        B = x * (np.bincount(columns.pa, qd, minlength=n)
                 - np.bincount(columns.ma, qs * (1.0 - xmb), minlength=n))
        a = float(np.maximum(A, B).sum())
        b = math.sqrt(float(pmax.sum() + mmax.sum()))
        return a, b
    if mode not in ("general", "binary"):
        raise ValueError(f"unknown pruning mode {mode!r}")

    a = float(q[columns.pcol] @ (pmax * pmax))
    bound = np.zeros(columns.n_cols)
    bound[columns.pcol] = pmax * pmax
    bound[columns.mcol] = np.maximum(bound[columns.mcol], mmax * mmax)
    b = float(np.linalg.norm(bound))
    return a, b


def prune_criterion(columns, x, q, r, mode="general"):
    """Upper bound of ``C_k' q + r ||C_k'||`` over every super-pattern ``k'`` of ``k``."""
    a, b = prune_terms(columns, x, q, mode)
    return a + r * b


def triplet_prune_criterion(columns, x, q, r):
    """Pruning bound for triplet columns.

    The first term uses ``max(x_i, x_l)**2``. The norm term bounds
    ``|(x_i - x_l)**2 - (x_i - x_j)**2|`` by ``max(x_i, x_j, x_l)**2``, since a
    bound using ``x_i, x_l`` alone misses columns driven by ``x_j``.
    """
    if columns.kind != "triplet":
        raise ValueError("triplet_prune_criterion needs triplet columns")
    return prune_criterion(columns, x, q, r, "general")


def sp_test(columns, x, q, r, lam, mode="general"):
    return prune_criterion(columns, x, q, r, mode) <= lam


def _range(lam0, norm_alpha0, a, b, eps):
    den = 2.0 * lam0 + norm_alpha0 * b - a
    if den <= 0.0:
        return math.inf
    return max(lam0 * (2.0 * eps * b + norm_alpha0 * b + a) / den, 0.0)


def rss_lambda(columns, x, alpha0, lam0, eps=0.0, norm_alpha0=None):
    """Smallest ``lam <= lam0`` down to which the feature stays screened."""
    v = columns.row_values(x)
    if norm_alpha0 is None:
        norm_alpha0 = float(np.linalg.norm(alpha0))
    return _range(lam0, norm_alpha0, float(v @ alpha0), float(np.linalg.norm(v)), eps)


def rsp_lambda(columns, x, alpha0, lam0, eps=0.0, mode="general", norm_alpha0=None):
    """Smallest ``lam <= lam0`` down to which the whole subtree stays pruned."""
    a, b = prune_terms(columns, x, alpha0, mode)
    if norm_alpha0 is None:
        norm_alpha0 = float(np.linalg.norm(alpha0))
    return _range(lam0, norm_alpha0, a, b, eps)


def ws_test(columns, x, alpha, lam):
    """True when the feature belongs to the working set ``C_k alpha > lam``."""
    return c_row_dot(columns, x, np.asarray(alpha, dtype=float)) > lam


def wp_criterion(columns, x, alpha, mode="general"):
    """Working-set pruning value; the subtree is skipped when it is ``<= lam``."""
    a, _ = prune_terms(columns, x, alpha, mode)
    return a
