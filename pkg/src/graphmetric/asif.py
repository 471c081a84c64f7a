"""Approximate subgraph inclusion via hierarchical neighbourhood labels.

Level 1 of a vertex's hierarchical label is its own label; level ``h`` pairs
the level ``h - 1`` label with the multiset of the neighbours' level ``h - 1``
labels. A pattern is approximately included in a graph when its level-``T``
labels can be matched injectively into the graph's level-``T`` labels, with
inclusion between labels decided level by level through bipartite matching.

The similarity version replaces yes/no inclusion by a transformation cost
(label dissimilarities summed through optimal assignments) and returns
``exp(-rho * cost)`` thresholded at ``t``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching


def wl_relabel(graph, T):
    """Hierarchical labels of every vertex at levels 1..T as nested tuples.

    Level 1 is ``(label, ())``; level h is ``(level h-1 label, sorted tuple of
    the neighbours' level h-1 labels)``.
    """
    cur = [(l, ()) for l in graph.labels]
    levels = [cur]
    for _ in range(T - 1):
        cur = [(cur[u], tuple(sorted(cur[v] for v in graph.adj[u])))
               for u in range(graph.n_vertices)]
        levels.append(cur)
    return levels


def label_level(label):
    level = 1
    while isinstance(label[0], tuple):
        label = label[0]
        level += 1
    return level


def _check_levels(a, b):
    la, lb = label_level(a), label_level(b)
    if la != lb:
        raise ValueError(f"labels have different levels ({la} and {lb})")


def label_included(a, b):
    """True when hierarchical label ``a`` is included in ``b`` (same level)."""
    _check_levels(a, b)
    memo = {}

    def inc(x, y):
        key = (x, y)
        if key in memo:
            return memo[key]
        fx, sx = x
        fy, sy = y
        if not isinstance(fx, tuple):
            ok = fx == fy
        else:
            ok = inc(fx, fy) and _injects(sx, sy, inc)
        memo[key] = ok
        return ok

    return inc(a, b)


def _injects(small, big, rel):
    if len(small) > len(big):
        return False
    if not small:
        return True
    adj = np.array([[rel(s, b) for b in big] for s in small], dtype=bool)
    return _matching_size(adj) == len(small)


def _matching_size(adj):
    if not adj.any(axis=1).all():
        return int(adj.any(axis=1).sum())
    match = maximum_bipartite_matching(csr_matrix(adj.astype(np.int8)), perm_type="column")
    return int((match >= 0).sum())


def inclusion_matrices(pattern, graph, T):
    """``incl[h][u, v]``: level-(h+1) label of pattern vertex u is included in
    that of graph vertex v."""
    lp, lg = pattern.labels, graph.labels
    incl = np.array([[a == b for b in lg] for a in lp], dtype=bool)
    out = [incl]
    for _ in range(T - 1):
        new = np.zeros_like(incl)
        for u in range(pattern.n_vertices):
            nu = list(pattern.adj[u])
            for v in range(graph.n_vertices):
                if not incl[u, v]:
                    continue
                nv = list(graph.adj[v])
                if len(nu) > len(nv):
                    continue
                if not nu:
                    new[u, v] = True
                    continue
                sub = incl[np.ix_(nu, nv)]
                new[u, v] = _matching_size(sub) == len(nu)
        incl = new
        out.append(incl)
    return out


def asif_feature(pattern, graph, T=3):
    """1.0 when every pattern vertex's level-T label injects into the graph's, else 0.0."""
    if pattern.n_vertices > graph.n_vertices:
        return 0.0
    incl = inclusion_matrices(pattern, graph, T)[-1]
    return 1.0 if _matching_size(incl) == pattern.n_vertices else 0.0


# costs ------------------------------------------------------------------------

def min_cost_injection(cost):
    """Cheapest injective assignment of rows into columns; ``inf`` if none exists.

    ``cost`` may contain ``inf`` for forbidden pairs.
    """
    cost = np.asarray(cost, dtype=float)
    r, c = cost.shape
    if r == 0:
        return 0.0
    if r > c:
        return math.inf
    finite = np.isfinite(cost)
    if not finite.any(axis=1).all():
        return math.inf
    big = (cost[finite].sum() + 1.0) * (r + 1)
    work = np.where(finite, cost, big)
    rows, cols = linear_sum_assignment(work)
    if not finite[rows, cols].all():
        return math.inf
    return float(cost[rows, cols].sum())


@dataclass(frozen=True)
class SimAsifConfig:
    T: int = 3
    rho: float = 1.0
    threshold: float = 0.7

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.threshold is not None and not 0 <= self.threshold <= 1:
            raise ValueError("threshold must lie in [0, 1]")

    @property
    def cost_cap(self):
        """Costs at or above this value cannot pass the threshold."""
        if not self.threshold:
            return math.inf
        return -math.log(self.threshold) / self.rho


def cost_matrices(pattern, graph, dissimilarity, T, cap=math.inf):
    """Transformation costs between hierarchical labels at each level.

    ``cost[h][u, v]`` is the level-(h+1) cost of turning pattern vertex u's
    label into graph vertex v's. Entries at or above ``cap`` become ``inf``.
    """
    D = np.asarray(dissimilarity, dtype=float)
    cost = D[np.ix_(pattern.labels, graph.labels)].copy()
    if cap < math.inf:
        cost[cost >= cap] = math.inf
    out = [cost]
    for _ in range(T - 1):
        new = np.full_like(cost, math.inf)
        for u in range(pattern.n_vertices):
            nu = list(pattern.adj[u])
            for v in range(graph.n_vertices):
                base = cost[u, v]
                if not math.isfinite(base):
                    continue
                nv = list(graph.adj[v])
                if len(nu) > len(nv):
                    continue
                extra = min_cost_injection(cost[np.ix_(nu, nv)]) if nu else 0.0
                total = base + extra
                if total < cap:
                    new[u, v] = total
        cost = new
        out.append(cost)
    return out


def label_cost(a, b, dissimilarity):
    """Cost of transforming hierarchical label ``a`` into ``b`` (same level)."""
    _check_levels(a, b)
    D = np.asarray(dissimilarity, dtype=float)
    memo = {}

    def cost(x, y):
        key = (x, y)
        if key in memo:
            return memo[key]
        fx, sx = x
        fy, sy = y
        if not isinstance(fx, tuple):
            val = float(D[fx, fy])
        else:
            val = cost(fx, fy)
            if math.isfinite(val):
                if len(sx) > len(sy):
                    val = math.inf
                elif sx:
                    val += min_cost_injection([[cost(s, t) for t in sy] for s in sx])
        memo[key] = val
        return val

    return cost(a, b)


def global_cost(pattern, graph, dissimilarity, T=3, cap=math.inf):
    if pattern.n_vertices > graph.n_vertices:
        return math.inf
    cost = cost_matrices(pattern, graph, dissimilarity, T, cap)[-1]
    return min_cost_injection(cost)


def sim_asif_feature(pattern, graph, dissimilarity, config=SimAsifConfig()):
    """``exp(-rho * cost)`` if above the threshold, else 0."""
    cap = config.cost_cap
    gtc = global_cost(pattern, graph, dissimilarity, config.T, cap)
    if not math.isfinite(gtc) or gtc >= cap:
        return 0.0
    val = math.exp(-config.rho * gtc)
    if config.threshold and val <= config.threshold:
        return 0.0
    return val


def build_dissimilarity_from_adjacency(graphs, n_labels=None):
    """Label dissimilarities from how often labels are adjacent across a dataset.

    Each label gets the vector of its adjacency counts with every label,
    scaled to unit length; the dissimilarity is the Euclidean distance
    between those vectors. A label never seen next to anything keeps the
    zero vector, so it sits at distance 1 from every observed label.
    """
    if n_labels is None:
        n_labels = 1 + max((max(g.labels) for g in graphs if g.labels), default=-1)
    F = np.zeros((n_labels, n_labels))
    for g in graphs:
        for u, v, _ in g.edges:
            F[g.labels[u], g.labels[v]] += 1
            F[g.labels[v], g.labels[u]] += 1
    norm = np.linalg.norm(F, axis=1, keepdims=True)
    V = np.divide(F, norm, out=np.zeros_like(F), where=norm > 0)
    sq = (V * V).sum(1)
    D = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * V @ V.T, 0.0))
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def load_dissimilarity(matrix_path, labels_path=None, label_names=None):
    """Read a headerless whitespace matrix and optional label-order file.

    When both ``labels_path`` and ``label_names`` are given the matrix is
    reordered so that row ``i`` corresponds to ``label_names[i]``.
    """
    D = np.loadtxt(matrix_path, ndmin=2)
    if D.shape[0] != D.shape[1]:
        raise ValueError(f"dissimilarity matrix must be square, got {D.shape}")
    if labels_path is not None and label_names is not None:
        with open(labels_path) as fh:
            order = [line.strip() for line in fh if line.strip()]
        if len(order) != D.shape[0]:
            raise ValueError("label file length does not match the matrix")
        pos = {name: i for i, name in enumerate(order)}
        try:
            idx = [pos[str(name)] for name in label_names]
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]} missing from {labels_path}") from None
        D = D[np.ix_(idx, idx)]
    return D


def make_scorer(feature_mode, T=3, dissimilarity=None, config=None):
    """Scorer ``f(pattern, graph)`` for a pattern tree in an ASIF feature mode."""
    if feature_mode == "asif":
        return lambda p, g: asif_feature(p, g, T)
    if feature_mode == "sim-asif":
        if dissimilarity is None:
            raise ValueError("sim-asif needs a dissimilarity matrix")
        config = config or SimAsifConfig(T=T)
        return lambda p, g: sim_asif_feature(p, g, dissimilarity, config)
    raise ValueError(f"no scorer for feature mode {feature_mode!r}")
