"""DFS codes and the minimum-code (canonical form) check.

A code is a tuple of edges ``(frm, to, frm_label, edge_label, to_label)``
where ``frm < to`` marks a forward (tree) edge and ``frm > to`` a backward
edge.
"""

from functools import lru_cache


class MalformedCodeError(ValueError):
    """A sequence of edge tuples that is not a rightmost-extension DFS code."""


def is_forward(edge):
    return edge[0] < edge[1]


def edge_less(e1, e2):
    """Total order on DFS-code edges used for lexicographic code comparison."""
    i1, j1 = e1[0], e1[1]
    i2, j2 = e2[0], e2[1]
    if (i1, j1) == (i2, j2):
        return e1[2:] < e2[2:]
    f1, f2 = i1 < j1, i2 < j2
    if f1 and f2:
        return j1 < j2 or (j1 == j2 and i1 > i2)
    if not f1 and not f2:
        return i1 < i2 or (i1 == i2 and j1 < j2)
    if not f1:
        return i1 < j2
    return j1 <= i2


def code_less(c1, c2):
    for a, b in zip(c1, c2):
        if a != b:
            return edge_less(a, b)
    return len(c1) < len(c2)


def n_vertices(code):
    return 1 + max(max(e[0], e[1]) for e in code) if code else 0


def rightmost_path(code):
    """Vertex indices on the rightmost path, from the root down to the rightmost vertex."""
    path = []
    want = None
    for frm, to, *_ in reversed(code):
        if frm < to and (want is None or to == want):
            path.append(to)
            want = frm
            if frm == 0:
                path.append(0)
                break
    return path[::-1]


def code_graph(code):
    """(vertex labels, adjacency dict-of-dicts) of the pattern a code describes."""
    nv = n_vertices(code)
    labels = [None] * nv
    adj = [dict() for _ in range(nv)]
    for frm, to, lf, le, lt in code:
        labels[frm] = lf
        labels[to] = lt
        adj[frm][to] = le
        adj[to][frm] = le
    return labels, adj


def code_to_text(code):
    return " ".join("(%d,%d,%d,%d,%d)" % e for e in code)


def code_from_text(text):
    code = []
    for tok in text.replace(" ", "").split(")"):
        if not tok:
            continue
        vals = tok.lstrip("(").split(",")
        if len(vals) != 5:
            raise ValueError(f"bad DFS edge {tok!r}")
        code.append(tuple(int(v) for v in vals))
    return tuple(code)


def validate_code(code):
    """Raise :class:`MalformedCodeError` unless ``code`` is a well-formed DFS code."""
    labels = {}
    seen = set()
    prefix = []
    for k, edge in enumerate(code):
        if len(edge) != 5:
            raise MalformedCodeError(f"edge {k} has {len(edge)} fields, expected 5")
        frm, to = edge[0], edge[1]
        if k == 0:
            if (frm, to) != (0, 1):
                raise MalformedCodeError("a code must start with edge (0, 1)")
        else:
            path = rightmost_path(prefix)
            nv = n_vertices(prefix)
            if frm < to:
                if to != nv or frm not in path:
                    raise MalformedCodeError(
                        f"edge {k}: forward edge must go from the rightmost path to vertex {nv}")
            elif frm > to:
                if frm != path[-1] or to not in path:
                    raise MalformedCodeError(
                        f"edge {k}: backward edge must leave the rightmost vertex")
            else:
                raise MalformedCodeError(f"edge {k} is a self loop")
        pair = frozenset((frm, to))
        if pair in seen:
            raise MalformedCodeError(f"edge {k} repeats vertices {frm}-{to}")
        seen.add(pair)
        for v, l in ((frm, edge[2]), (to, edge[4])):
            if labels.setdefault(v, l) != l:
                raise MalformedCodeError(f"edge {k}: vertex {v} relabelled {labels[v]} -> {l}")
        prefix.append(edge)


def _min_next(code_prefix, labels, adj, embeddings):
    """Smallest rightmost extension of ``code_prefix`` over the given embeddings.

    Returns ``(edge, new_embeddings)`` or ``(None, [])`` when no extension exists.
    """
    path = rightmost_path(code_prefix)
    rm = path[-1]
    nv = n_vertices(code_prefix)
    pattern_edges = {(e[0], e[1]) for e in code_prefix} | {(e[1], e[0]) for e in code_prefix}

    best, best_embs = None, []
    # backward edges from the rightmost vertex, smallest target first
    for j in path[:-1]:
        if (rm, j) in pattern_edges:
            continue
        for emb in embeddings:
            le = adj[emb[rm]].get(emb[j])
            if le is None:
                continue
            cand = (rm, j, labels[emb[rm]], le, labels[emb[j]])
            if best is None or cand < best:
                best, best_embs = cand, [emb]
            elif cand == best:
                best_embs.append(emb)
        if best is not None:
            return best, best_embs
    # forward edges, deepest rightmost-path vertex first
    for i in reversed(path):
        for emb in embeddings:
            used = set(emb)
            for w, le in adj[emb[i]].items():
                if w in used:
                    continue
                cand = (i, nv, labels[emb[i]], le, labels[w])
                if best is None or cand < best:
                    best, best_embs = cand, [emb + (w,)]
                elif cand == best:
                    best_embs.append(emb + (w,))
        if best is not None:
            return best, best_embs
    return None, []


@lru_cache(maxsize=200000)
def is_minimum_dfs_code(code):
    """True iff ``code`` is the minimum DFS code of the pattern it describes."""
    code = tuple(tuple(e) for e in code)
    validate_code(code)
    if not code:
        return True
    labels, adj = code_graph(code)
    first = None
    embs = []
    for u in range(len(labels)):
        for v, le in adj[u].items():
            cand = (0, 1, labels[u], le, labels[v])
            if first is None or cand < first:
                first, embs = cand, [(u, v)]
            elif cand == first:
                embs.append((u, v))
    if first != code[0]:
        return False
    for k in range(1, len(code)):
        nxt, embs = _min_next(code[:k], labels, adj, embs)
        if nxt is None:
            return False
        if nxt != code[k]:
            return False
    return True
