"""Occurrence counts of subgraph patterns and test-time feature extraction."""

import math
from itertools import combinations

from .dfscode import code_from_text
from .gspan import approx_count, code_embeddings, extend_embeddings


def distinct_occurrences(code, graph):
    """Distinct (vertex set, edge set) images of ``code`` in ``graph``."""
    occ = set()
    for emb in code_embeddings(code, graph):
        verts = frozenset(emb)
        edges = frozenset(frozenset((emb[f], emb[t])) for f, t, *_ in code)
        occ.add((verts, edges))
    return list(occ)


def exact_nonoverlap_count(code, graph, limit=12):
    """Largest set of pairwise vertex-disjoint occurrences, by brute force.

    Intended as a reference on small cases; raises if there are more than
    ``limit`` distinct occurrences.
    """
    occ = distinct_occurrences(code, graph)
    if len(occ) > limit:
        raise ValueError(f"{len(occ)} occurrences exceed the brute-force limit {limit}")
    verts = [v for v, _ in occ]
    for size in range(len(verts), 0, -1):
        for group in combinations(verts, size):
            if all(a.isdisjoint(b) for a, b in combinations(group, 2)):
                return size
    return 0


def _trie(codes):
    root = {}
    for code in codes:
        cur = root
        for edge in code:
            cur = cur.setdefault(edge, {})
        cur[None] = code
    return root


def enumerate_for_test(codes, graph, feature_mode="indicator"):
    """Feature values of the given DFS codes in an unseen graph.

    Only prefixes of the requested codes are explored, and a prefix with no
    embedding stops its whole branch. Returns ``{code: value}`` with zero
    entries omitted.
    """
    codes = [code_from_text(c) if isinstance(c, str) else tuple(c) for c in codes]
    out = {}

    def visit(node, embs):
        for edge, sub in node.items():
            if edge is None:
                continue
            nxt = code_embeddings((edge,), graph) if embs is None else \
                extend_embeddings(embs, edge, graph)
            if not nxt:
                continue
            code = sub.get(None)
            if code is not None:
                if feature_mode == "indicator":
                    out[code] = 1.0
                elif feature_mode == "log-approx":
                    out[code] = math.log1p(approx_count(nxt))
                else:
                    raise ValueError(f"unsupported feature mode {feature_mode!r}")
            visit(sub, nxt)

    visit(_trie(codes), None)
    return out
