"""Subgraph pattern tree grown by rightmost extension of minimum DFS codes."""

import math
from collections import defaultdict
from functools import cmp_to_key

import numpy as np

from ..graphs import Graph
from .dfscode import (code_graph, code_to_text, edge_less, is_minimum_dfs_code,
                      n_vertices, rightmost_path)
from .tree import BackendMismatchError, PatternTree

GRAPH_FEATURE_MODES = ("indicator", "log-approx", "asif", "sim-asif")

_edge_key = cmp_to_key(lambda a, b: -1 if edge_less(a, b) else (1 if edge_less(b, a) else 0))


def code_pattern_graph(code):
    labels, adj = code_graph(code)
    edges = [(u, v, e) for u in range(len(adj)) for v, e in adj[u].items() if u < v]
    return Graph(labels, edges)


def approx_count(embeddings):
    """Distinct images of the first DFS edge among a pattern's embeddings in one graph."""
    return len({frozenset(emb[:2]) for emb in embeddings})


def code_embeddings(code, graph):
    """All embeddings (pattern vertex -> graph vertex tuples) of ``code`` in ``graph``."""
    if not code:
        return []
    labels, adj = graph.labels, graph.adj
    f, t, lf, le, lt = code[0]
    embs = []
    for u, v, e in graph.edges:
        if e != le:
            continue
        if labels[u] == lf and labels[v] == lt:
            embs.append((u, v))
        if labels[v] == lf and labels[u] == lt:
            embs.append((v, u))
    for edge in code[1:]:
        embs = extend_embeddings(embs, edge, graph)
        if not embs:
            break
    return embs


def extend_embeddings(embs, edge, graph):
    frm, to, lf, le, lt = edge
    labels, adj = graph.labels, graph.adj
    out = []
    if frm > to:
        for emb in embs:
            if adj[emb[frm]].get(emb[to]) == le:
                out.append(emb)
    else:
        for emb in embs:
            u = emb[frm]
            for w, e in adj[u].items():
                if e == le and labels[w] == lt and w not in emb:
                    out.append(emb + (w,))
    return out


class GraphPatternTree(PatternTree):
    """Tree of connected subgraph patterns over a training set of graphs.

    Parameters
    ----------
    graphs : list of Graph
    max_pattern_size : int
        Maximum number of pattern vertices. A pattern of this size can still
        gain edges between its existing vertices.
    feature_mode : {'indicator', 'log-approx', 'asif', 'sim-asif'}
    asif_scorer : callable, optional
        ``scorer(pattern_graph, graph) -> float`` used by the two ASIF modes.
    """

    backend = "graph"

    def __init__(self, graphs, max_pattern_size=8, feature_mode="indicator",
                 asif_scorer=None):
        if feature_mode not in GRAPH_FEATURE_MODES:
            raise ValueError(f"unknown feature mode {feature_mode!r}; "
                             f"choose from {GRAPH_FEATURE_MODES}")
        if feature_mode in ("asif", "sim-asif") and asif_scorer is None:
            raise ValueError(f"feature mode {feature_mode!r} needs an asif_scorer")
        if max_pattern_size < 2:
            raise ValueError("max_pattern_size must be at least 2")
        super().__init__(len(graphs), max_pattern_size,
                         binary=feature_mode in ("indicator", "asif"))
        self.graphs = list(graphs)
        self.feature_mode = feature_mode
        self.asif_scorer = asif_scorer

    # feature values -------------------------------------------------------

    def _column(self, code, embeddings, parent_column):
        col = np.zeros(self.n_samples)
        mode = self.feature_mode
        if mode == "indicator":
            col[list(embeddings)] = 1.0
        elif mode == "log-approx":
            for gid, embs in embeddings.items():
                col[gid] = math.log1p(approx_count(embs))
        else:
            pattern = code_pattern_graph(code)
            for gid, graph in enumerate(self.graphs):
                if parent_column is not None and parent_column[gid] == 0.0:
                    continue  # values only shrink down the tree
                col[gid] = self.asif_scorer(pattern, graph)
        return col

    # growth ---------------------------------------------------------------

    def _root_specs(self):
        ext = defaultdict(lambda: defaultdict(list))
        for gid, g in enumerate(self.graphs):
            lab = g.labels
            for u, v, e in g.edges:
                for a, b in ((u, v), (v, u)):
                    if lab[a] <= lab[b]:
                        ext[(0, 1, lab[a], e, lab[b])][gid].append((a, b))
        return self._specs_from(ext, (), None)

    def _child_specs(self, node):
        code = node.key
        path = rightmost_path(code)
        rm = path[-1]
        nv = n_vertices(code)
        grow = nv < self.max_pattern_size
        first = code[0][2:]
        pattern_edges = {(e[0], e[1]) for e in code} | {(e[1], e[0]) for e in code}
        back_targets = [j for j in path[:-1] if (rm, j) not in pattern_edges]

        ext = defaultdict(lambda: defaultdict(list))
        for gid, embs in node.support.items():
            g = self.graphs[gid]
            lab, adj = g.labels, g.adj
            for emb in embs:
                urm = emb[rm]
                adj_rm = adj[urm]
                for j in back_targets:
                    le = adj_rm.get(emb[j])
                    if le is not None:
                        edge = (rm, j, lab[urm], le, lab[emb[j]])
                        if min(edge[2:], edge[:1:-1]) >= first:
                            ext[edge][gid].append(emb)
                if not grow:
                    continue
                for i in path:
                    ui = emb[i]
                    li = lab[ui]
                    for w, le in adj[ui].items():
                        if w in emb:
                            continue
                        lw = lab[w]
                        if (min(li, lw), le, max(li, lw)) < first:
                            continue
                        ext[(i, nv, li, le, lw)][gid].append(emb + (w,))
        return self._specs_from(ext, code, node.column)

    def _specs_from(self, ext, code, parent_column):
        specs = []
        for edge in sorted(ext, key=_edge_key):
            child = code + (edge,)
            if not is_minimum_dfs_code(child):
                continue
            embeddings = {gid: embs for gid, embs in sorted(ext[edge].items())}
            column = self._column(child, embeddings, parent_column)
            specs.append((child, n_vertices(child), column, embeddings))
        return specs

    # queries --------------------------------------------------------------

    def feature_value(self, node, i):
        return float(node.column[i])

    def approx_nonoverlap_count(self, node, i):
        return approx_count(node.support.get(i, ()))

    def embedding_count(self, node, i):
        return len(node.support.get(i, ()))

    def key_text(self, key):
        return code_to_text(key)


def require_graph_tree(tree):
    if getattr(tree, "backend", None) != "graph":
        raise BackendMismatchError(
            f"operation needs a graph pattern tree, got backend {getattr(tree, 'backend', None)!r}")
