"""Regularisation-path optimisation of sparse pattern weights.

The primal problem at strength ``lam`` is::

    min_{m >= 0}  sum_c max(t_c - m . C[:, c], 0)**2 + lam * (|m|_1 + eta/2 |m|^2)

with one entry of ``m`` per pattern in the (implicit) tree. Its dual is::

    max_alpha  -|alpha|^2 / 4 + t . alpha - lam*eta/2 |m(alpha)|^2,
    m(alpha) = max(C alpha - lam, 0) / (lam * eta)

Only a small working set of patterns is ever materialised; screening and
pruning decide which ones while the tree is walked.
"""

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import screening
from .features import ColumnSpace
from .graphs import select_triplets

RULES = ("ssp", "rssp", "wsp", "wsp+rssp")


class SolverDivergenceError(RuntimeError):
    """The objective became non-finite during optimisation."""


@dataclass
class PathConfig:
    """Settings for :func:`pathwise_optimize`.

    The grid has ``n_lambdas`` points ``lam_max * R**i``. ``R`` defaults to
    ``lambda_min_ratio ** (1 / (n_lambdas - 1))``.
    """

    n_lambdas: int = 100
    lambda_min_ratio: float = 0.01
    R: float = None
    freq: int = 10
    max_iter: int = 10000
    eps: float = 1e-6
    eta: float = 1.0
    rules: str = "wsp+rssp"
    max_refreshes: int = 1000

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.rules not in RULES:
            raise ValueError(f"unknown rules {self.rules!r}; choose from {RULES}")
        if self.n_lambdas < 1:
            raise ValueError("n_lambdas must be at least 1")
        if self.R is None:
            if not 0 < self.lambda_min_ratio <= 1:
                raise ValueError("lambda_min_ratio must lie in (0, 1]")
            steps = max(self.n_lambdas - 1, 1)
            self.R = self.lambda_min_ratio ** (1.0 / steps)
        if not 0 < self.R < 1 and self.n_lambdas > 1:
            raise ValueError("R must lie in (0, 1)")
        if self.freq < 1 or self.max_iter < 1 or not self.eps > 0:
            raise ValueError("freq, max_iter and eps must be positive")


# objectives on a dense design ---------------------------------------------

def alpha_of_m(Ct, t, m):
    """Dual point induced by a primal point: ``2 max(t - C^T m, 0)``."""
    return 2.0 * np.maximum(t - Ct @ m, 0.0)


def m_of_alpha(Ct, alpha, lam, eta):
    return np.maximum(Ct.T @ alpha - lam, 0.0) / (lam * eta)


def primal_objective(Ct, t, m, lam, eta):
    if np.any(m < 0):
        raise ValueError("weights must be non-negative")
    r = np.maximum(t - Ct @ m, 0.0)
    return float(r @ r + lam * (m.sum() + 0.5 * eta * (m @ m)))


def dual_objective(Ct, t, alpha, lam, eta):
    mu = m_of_alpha(Ct, alpha, lam, eta)
    return float(-0.25 * (alpha @ alpha) + t @ alpha - 0.5 * lam * eta * (mu @ mu))


def dual_from_scores(t, alpha, scores, lam, eta):
    """Dual objective when only ``C_k alpha`` for the working set is known."""
    excess = np.maximum(np.asarray(scores, dtype=float) - lam, 0.0)
    return float(-0.25 * (alpha @ alpha) + t @ alpha - (excess @ excess) / (2.0 * lam * eta))


# sub-problem ----------------------------------------------------------------

@dataclass
class SubproblemResult:
    m: np.ndarray
    alpha: np.ndarray
    primal: float
    dual: float
    iterations: int
    converged: bool
    screened: int = 0

    @property
    def gap(self):
        return self.primal - self.dual


def _newton_step(C, t, m, z, lam, eta):
    """Exact minimiser on the current sign pattern (support and active losses).

    The objective is quadratic while neither pattern changes, so one linear
    solve lands on the optimum once projected gradient has identified them.
    """
    S = m > 0
    A = t - z > 0
    if not S.any():
        return None
    CS = C[np.ix_(A, S)]
    H = 2.0 * CS.T @ CS + lam * eta * np.eye(int(S.sum()))
    try:
        mS = np.linalg.solve(H, 2.0 * CS.T @ t[A] - lam)
    except np.linalg.LinAlgError:
        return None
    if np.any(mS <= 0):
        return None  # the support is still wrong; leave it to projected gradient
    out = np.zeros_like(m)
    out[S] = mS
    return out


def solve_subproblem(Ct, t, lam, eta=1.0, m0=None, freq=10, max_iter=10000, eps=1e-6):
    """Projected gradient with backtracking on the features in ``Ct``'s columns.

    Every ``freq`` iterations, features that the duality-gap ball proves
    inactive are removed and a Newton step on the current support is tried,
    kept only when it lowers the objective. Returns when the relative gap
    drops to ``eps``.
    """
    n_feat = Ct.shape[1]
    m = np.zeros(n_feat) if m0 is None else np.maximum(np.asarray(m0, dtype=float), 0.0)
    idx = np.arange(n_feat)
    C = Ct
    norms = np.linalg.norm(Ct, axis=0)
    z = C @ m
    gamma = 1.0
    screened = 0
    it = 0
    while True:
        mi = m[idx]
        res = np.maximum(t - z, 0.0)
        alpha = 2.0 * res
        P = float(res @ res + lam * (mi.sum() + 0.5 * eta * (mi @ mi)))
        if not math.isfinite(P):
            raise SolverDivergenceError(f"primal objective became {P} at iteration {it}")
        scores = C.T @ alpha
        D = dual_from_scores(t, alpha, scores, lam, eta)
        gap = P - D
        if gap <= eps * P or it >= max_iter:
            return SubproblemResult(m, alpha, P, D, it, gap <= eps * P, screened)

        if it % freq == 0 and len(idx):
            radius = 2.0 * math.sqrt(max(gap, 0.0))
            drop = scores + radius * norms[idx] <= lam
            if drop.any():
                m[idx[drop]] = 0.0
                screened += int(drop.sum())
                keep = ~drop
                idx = idx[keep]
                C = Ct[:, idx]
                z = C @ m[idx]
                it += 1
                continue

        if it % freq == 0 and len(idx):
            cand = _newton_step(C, t, mi, z, lam, eta)
            if cand is not None:
                z_new = C @ cand
                r_new = np.maximum(t - z_new, 0.0)
                P_new = float(r_new @ r_new + lam * (cand.sum() + 0.5 * eta * (cand @ cand)))
                if P_new < P:
                    m[idx] = cand
                    z = z_new
                    it += 1
                    continue

        grad = -scores + lam * (1.0 + eta * mi)
        while True:
            m_new = np.maximum(mi - gamma * grad, 0.0)
            d = m_new - mi
            z_new = z + C @ d
            r_new = np.maximum(t - z_new, 0.0)
            P_new = float(r_new @ r_new + lam * (m_new.sum() + 0.5 * eta * (m_new @ m_new)))
            if not math.isfinite(P_new):
                raise SolverDivergenceError(f"primal objective became {P_new} at iteration {it}")
            if P_new <= P + grad @ d + (d @ d) / (2.0 * gamma) + 1e-15 * abs(P):
                break
            gamma *= 0.5
            if gamma < 1e-300:
                raise SolverDivergenceError("step size underflow in line search")
        m[idx] = m_new
        z = z_new
        gamma = min(2.0 * gamma, 1.0)
        it += 1


# tree walks -----------------------------------------------------------------

def compute_lambda_max(tree, columns, alpha0=None):
    """Largest ``C_k alpha0`` over the whole tree, found with subtree pruning.

    ``alpha0`` defaults to the dual point at ``m = 0``. Returns
    ``(lam_max, best_node, n_visited)``.
    """
    if alpha0 is None:
        alpha0 = 2.0 * np.maximum(columns.t, 0.0)
    mode = "binary" if tree.binary else "general"
    best, best_node, visited = -math.inf, None, 0
    stack = list(reversed(tree.children(tree.root)))
    while stack:
        node = stack.pop()
        visited += 1
        if screening.wp_criterion(columns, node.column, alpha0, mode) <= best:
            continue
        score = float(columns.row_values(node.column) @ alpha0)
        if score > best:
            best, best_node = score, node
        stack.extend(reversed(tree.children(node)))
    if best_node is None or best <= 0:
        raise ValueError("no pattern has positive correlation with the loss; lam_max is not positive")
    return best, best_node, visited


@dataclass
class TraversalResult:
    nodes: list
    scores: list
    visited: int = 0
    pruned: int = 0
    screened: int = 0


def traverse(tree, columns, lam, alpha, rules="wsp+rssp", lam0=None, eps=0.0,
             update=False, audit=None):
    """Walk the tree and return the working set of patterns for ``lam``.

    ``alpha`` is the reference dual point (the solution at ``lam0`` when
    ``update`` is true, the current iterate otherwise). With range rules and
    ``update`` the per-node range caches are refreshed from
    ``(alpha, lam0, eps)``.

    ``audit``, if given, is called as ``audit(event, node, info)`` for safe
    eliminations (``'screen'``, ``'prune'``) and for every evaluated node
    (``'node'``).
    """
    if rules not in RULES:
        raise ValueError(f"unknown rules {rules!r}")
    mode = "binary" if tree.binary else "general"
    alpha = np.asarray(alpha, dtype=float)
    norm_alpha = float(np.linalg.norm(alpha))
    use_range = rules in ("rssp", "wsp+rssp")
    use_ws = rules in ("wsp", "wsp+rssp")
    if rules == "ssp" or (use_range and update) or audit is not None:
        if lam0 is None:
            raise ValueError("lam0 is required for safe rules")
    if rules == "ssp" or audit is not None:
        q, r = screening.rrpb(alpha, lam0, lam, eps)

    out = TraversalResult([], [])
    stack = list(reversed(tree.children(tree.root)))
    while stack:
        node = stack.pop()
        out.visited += 1
        x = node.column
        include = False
        if use_range:
            if node.pruning <= lam:
                out.pruned += 1
                if audit is not None:
                    audit("prune", node, {"lam": lam, "cached": True})
                continue
            if node.screening > lam:
                if update:
                    node.pruning = screening.rsp_lambda(columns, x, alpha, lam0, eps, mode,
                                                        norm_alpha)
                if node.pruning <= lam:
                    out.pruned += 1
                    if audit is not None:
                        audit("prune", node, {"lam": lam})
                    continue
                if use_ws and screening.wp_criterion(columns, x, alpha, mode) <= lam:
                    continue
                v = columns.row_values(x)
                score = float(v @ alpha)
                if update:
                    node.screening = screening._range(lam0, norm_alpha, score,
                                                      float(np.linalg.norm(v)), eps)
                if node.screening > lam:
                    include = score > lam if use_ws else True
                else:
                    out.screened += 1
                    if audit is not None:
                        audit("screen", node, {"lam": lam})
            else:
                out.screened += 1
                if audit is not None:
                    audit("screen", node, {"lam": lam, "cached": True})
        elif rules == "ssp":
            if screening.prune_criterion(columns, x, q, r, mode) <= lam:
                out.pruned += 1
                if audit is not None:
                    audit("prune", node, {"lam": lam})
                continue
            v = columns.row_values(x)
            score = float(v @ alpha)
            if float(v @ q + r * np.linalg.norm(v)) <= lam:
                out.screened += 1
                if audit is not None:
                    audit("screen", node, {"lam": lam})
            else:
                include = True
        else:  # wsp
            if screening.wp_criterion(columns, x, alpha, mode) <= lam:
                continue
            score = float(columns.row_values(x) @ alpha)
            include = score > lam

        if audit is not None:
            v = columns.row_values(x)
            audit("node", node, {
                "lam": lam, "score": float(v @ alpha), "norm": float(np.linalg.norm(v)),
                "ss": float(v @ q + r * np.linalg.norm(v)) <= lam,
                "sp_value": screening.prune_criterion(columns, x, q, r, mode),
                "wp_value": screening.wp_criterion(columns, x, alpha, mode),
                "sphere": (q, r),
            })
        if include:
            out.nodes.append(node)
            out.scores.append(score)
        stack.extend(reversed(tree.children(node)))
    return out


# path -----------------------------------------------------------------------

@dataclass
class SolveResult:
    """Weights along the regularisation path.

    ``weights[i]`` maps node ids to positive weights at ``lambdas[i]``.
    ``stats[i]`` records visited nodes, working-set sizes, refresh counts,
    the final relative gap and timings for that grid point.
    """

    tree: object
    lambdas: np.ndarray
    weights: list
    alphas: list
    primals: list
    gaps: list
    stats: list = field(default_factory=list)
    lambda_max_visited: int = 0

    def weights_by_key(self, i):
        return {self.tree.nodes[k].key: w for k, w in self.weights[i].items()}

    def relative_gaps(self):
        return [g / p if p > 0 else 0.0 for g, p in zip(self.gaps, self.primals)]

    def write_stats_csv(self, path, timings_path=None):
        """Write per-lambda statistics; wall times go to ``timings_path`` if given.

        Keeping timings in a separate file leaves ``path`` reproducible
        byte-for-byte across runs with the same inputs.
        """
        if not self.stats:
            return
        timed = ("traverse_seconds", "solve_seconds")
        keys = [k for k in self.stats[0] if timings_path is None or k not in timed]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys, extrasaction="ignore")
            w.writeheader()
            w.writerows(self.stats)
        if timings_path is not None:
            with open(timings_path, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=("index",) + timed, extrasaction="ignore")
                w.writeheader()
                w.writerows(self.stats)


def _dense(nodes):
    if not nodes:
        return np.zeros((0, 0))
    return np.column_stack([n.column for n in nodes])


def pathwise_optimize(tree, columns, config=None, audit=None, log=None):
    """Solve the problem at every point of a geometric grid from ``lam_max`` down.

    Parameters
    ----------
    tree : PatternTree
    columns : ColumnSpace
    config : PathConfig
    audit : callable, optional
        Passed through to :func:`traverse` for the first walk at each grid point.
    log : callable, optional
        Receives one human-readable progress line per grid point.
    """
    config = PathConfig() if config is None else config
    t = columns.t
    eta = config.eta
    alpha = 2.0 * np.maximum(t, 0.0)
    lam_max, _, visited = compute_lambda_max(tree, columns, alpha)
    tree.reset_caches()
    lambdas = lam_max * config.R ** np.arange(config.n_lambdas)
    P0 = float(np.maximum(t, 0.0) @ np.maximum(t, 0.0))
    result = SolveResult(tree, lambdas, [{}], [alpha.copy()], [P0], [0.0],
                         lambda_max_visited=visited)
    result.stats.append({"index": 0, "lambda": lam_max, "visited": visited, "working_set": 0,
                         "refreshes": 0, "iterations": 0, "nonzeros": 0, "primal": P0,
                         "gap": 0.0, "relative_gap": 0.0, "converged": True,
                         "traverse_seconds": 0.0, "solve_seconds": 0.0})
    weights = {}
    ball = 0.0
    ws = config.rules in ("wsp", "wsp+rssp")

    for i in range(1, config.n_lambdas):
        lam, lam_prev = lambdas[i], lambdas[i - 1]
        t0 = time.perf_counter()
        walk = traverse(tree, columns, lam, alpha, config.rules, lam0=lam_prev, eps=ball,
                        update=True, audit=audit)
        t_trav = time.perf_counter() - t0
        first_visited, first_size = walk.visited, len(walk.nodes)
        nodes = walk.nodes
        refreshes = iterations = rounds = 0
        t_solve = 0.0
        while True:
            Ct = columns.matrix(_dense(nodes)) if nodes else np.zeros((columns.n_cols, 0))
            m0 = np.array([weights.get(n.id, 0.0) for n in nodes])
            t1 = time.perf_counter()
            sub = solve_subproblem(Ct, t, lam, eta, m0, config.freq, config.max_iter, config.eps)
            t_solve += time.perf_counter() - t1
            iterations += sub.iterations
            alpha = sub.alpha
            weights = {n.id: float(w) for n, w in zip(nodes, sub.m) if w > 0}
            primal = sub.primal
            if ws:
                t0 = time.perf_counter()
                walk = traverse(tree, columns, lam, alpha, config.rules)
                t_trav += time.perf_counter() - t0
                refreshes += 1
                nodes = walk.nodes
                dual = dual_from_scores(t, alpha, walk.scores, lam, eta)
            else:
                dual = sub.dual
            gap = primal - dual
            rounds += 1
            if gap <= config.eps * primal or rounds >= config.max_refreshes:
                break
        ball = 2.0 * math.sqrt(max(gap, 0.0))
        result.weights.append(weights)
        result.alphas.append(alpha.copy())
        result.primals.append(primal)
        result.gaps.append(gap)
        rel = gap / primal if primal > 0 else 0.0
        result.stats.append({"index": i, "lambda": float(lam), "visited": first_visited,
                             "working_set": first_size, "refreshes": refreshes,
                             "iterations": iterations, "nonzeros": len(weights),
                             "primal": primal, "gap": gap, "relative_gap": rel,
                             "converged": rel <= config.eps,
                             "traverse_seconds": round(t_trav, 6),
                             "solve_seconds": round(t_solve, 6)})
        if log is not None:
            log(f"[{i}/{config.n_lambdas - 1}] lambda={lam:.6g} |F|={first_size} "
                f"nnz={len(weights)} refreshes={refreshes} rel_gap={rel:.2e}")
    return result


def build_triplet_system(kernel, labels, k_trip=4):
    """Triplet loss columns from the kernel's nearest neighbours."""
    trip = select_triplets(kernel, labels, k_trip)
    return ColumnSpace.from_triplets(trip, len(labels))
