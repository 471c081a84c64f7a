"""Labeled graphs, TU-format loading, the WL subtree kernel and neighbour pairs."""

import os
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse


class DatasetFormatError(ValueError):
    """Raised when a dataset file is malformed."""


class PairSelectionError(ValueError):
    """Raised when a class is too small to supply K neighbours."""


class Graph:
    """Undirected simple graph with integer vertex and edge labels.

    Parameters
    ----------
    labels : sequence of int
        Vertex labels, one per vertex.
    edges : iterable of (u, v, edge_label)
        Undirected edges. Self loops are dropped and duplicates merged
        (first label wins).
    """

    __slots__ = ("labels", "adj", "edges")

    def __init__(self, labels, edges=()):
        self.labels = tuple(int(l) for l in labels)
        n = len(self.labels)
        self.adj = [dict() for _ in range(n)]
        self.edges = []
        for u, v, e in edges:
            u, v = int(u), int(v)
            if u == v or v in self.adj[u]:
                continue
            if not (0 <= u < n and 0 <= v < n):
                raise IndexError(f"edge ({u}, {v}) out of range for {n} vertices")
            self.adj[u][v] = int(e)
            self.adj[v][u] = int(e)
            self.edges.append((u, v, int(e)))

    @property
    def n_vertices(self):
        return len(self.labels)

    @property
    def n_edges(self):
        return len(self.edges)

    def neighbors(self, u):
        return self.adj[u].items()

    def components(self):
        """Connected components as sorted vertex lists, ordered by first vertex."""
        seen = [False] * self.n_vertices
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def induced(self, vertices):
        vertices = list(vertices)
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[u], index[v], e) for u, v, e in self.edges
                 if u in index and v in index]
        return Graph([self.labels[v] for v in vertices], edges)

    def largest_component(self):
        """Largest connected component; ties go to the one holding the lowest vertex."""
        if self.n_vertices == 0:
            return self
        comps = self.components()
        best = max(comps, key=len)  # max() keeps the first of equal lengths
        if len(best) == self.n_vertices:
            return self
        return self.induced(best)

    def __repr__(self):
        return f"Graph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


@dataclass
class GraphDataset:
    """Graphs with class labels.

    ``vertex_label_names`` and ``class_names`` map the dense integer ids back
    to the raw labels found in the source files.
    """

    graphs: list
    y: np.ndarray
    name: str = ""
    vertex_label_names: list = field(default_factory=list)
    edge_label_names: list = field(default_factory=list)
    class_names: list = field(default_factory=list)

    def __len__(self):
        return len(self.graphs)

    def subset(self, indices):
        indices = list(indices)
        return GraphDataset([self.graphs[i] for i in indices], self.y[indices],
                            self.name, self.vertex_label_names,
                            self.edge_label_names, self.class_names)

    @property
    def n_vertex_labels(self):
        if self.vertex_label_names:
            return len(self.vertex_label_names)
        return 1 + max((max(g.labels) for g in self.graphs if g.labels), default=-1)


def _read_ints(path, n_cols=None):
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing dataset file: {os.path.basename(path)}")
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = [p for p in line.replace(",", " ").split()]
            try:
                vals = [int(float(p)) for p in parts]
            except ValueError:
                raise DatasetFormatError(
                    f"{os.path.basename(path)}:{lineno}: not an integer row: {line!r}") from None
            if n_cols is not None and len(vals) != n_cols:
                raise DatasetFormatError(
                    f"{os.path.basename(path)}:{lineno}: expected {n_cols} values, got {len(vals)}")
            rows.append((lineno, vals))
    return rows


def _dense_ids(values):
    names = sorted(set(values))
    index = {v: i for i, v in enumerate(names)}
    return [index[v] for v in values], names


def load_tu_dataset(directory, name, keep_largest_component=True):
    """Read a dataset in the TU benchmark text layout.

    Expects ``<name>_A.txt``, ``<name>_graph_indicator.txt``,
    ``<name>_graph_labels.txt`` and ``<name>_node_labels.txt`` in
    ``directory``; ``<name>_edge_labels.txt`` is optional. Every graph is cut
    down to its largest connected component and all labels are remapped to
    dense ids starting at 0.
    """
    def path(suffix):
        return os.path.join(directory, f"{name}_{suffix}.txt")

    indicator = _read_ints(path("graph_indicator"), 1)
    graph_labels = _read_ints(path("graph_labels"), 1)
    node_labels = _read_ints(path("node_labels"))
    adjacency = _read_ints(path("A"), 2)
    edge_label_rows = None
    if os.path.exists(path("edge_labels")):
        edge_label_rows = _read_ints(path("edge_labels"))
        if len(edge_label_rows) != len(adjacency):
            raise DatasetFormatError(
                f"{name}_edge_labels.txt has {len(edge_label_rows)} rows, "
                f"{name}_A.txt has {len(adjacency)}")

    n_nodes = len(indicator)
    n_graphs = len(graph_labels)
    if len(node_labels) != n_nodes:
        raise DatasetFormatError(
            f"{name}_node_labels.txt has {len(node_labels)} rows, expected {n_nodes}")

    graph_of = np.empty(n_nodes, dtype=np.int64)
    for i, (lineno, (g,)) in enumerate(indicator):
        if not 1 <= g <= n_graphs:
            raise DatasetFormatError(
                f"{name}_graph_indicator.txt:{lineno}: graph id {g} out of range 1..{n_graphs}")
        graph_of[i] = g - 1

    raw_vertex = [vals[0] for _, vals in node_labels]
    vertex_ids, vertex_names = _dense_ids(raw_vertex)
    if edge_label_rows is not None:
        edge_ids, edge_names = _dense_ids([vals[0] for _, vals in edge_label_rows])
    else:
        edge_ids, edge_names = [0] * len(adjacency), []
    class_ids, class_names = _dense_ids([vals[0] for _, vals in graph_labels])

    members = [[] for _ in range(n_graphs)]
    local = np.empty(n_nodes, dtype=np.int64)
    for v in range(n_nodes):
        local[v] = len(members[graph_of[v]])
        members[graph_of[v]].append(v)
    edges = [[] for _ in range(n_graphs)]
    for (lineno, (u, v)), e in zip(adjacency, edge_ids):
        if not (1 <= u <= n_nodes and 1 <= v <= n_nodes):
            raise DatasetFormatError(
                f"{name}_A.txt:{lineno}: vertex index out of range 1..{n_nodes}")
        u -= 1
        v -= 1
        if graph_of[u] != graph_of[v]:
            raise DatasetFormatError(
                f"{name}_A.txt:{lineno}: edge joins vertices of different graphs")
        edges[graph_of[u]].append((local[u], local[v], e))

    graphs = []
    for g in range(n_graphs):
        graph = Graph([vertex_ids[v] for v in members[g]], edges[g])
        graphs.append(graph.largest_component() if keep_largest_component else graph)
    return GraphDataset(graphs, np.asarray(class_ids, dtype=np.int64), name,
                        vertex_names, edge_names, class_names)


def wl_features(graphs, h=3):
    """Sparse WL subtree label histograms, one row per graph, iterations 0..h."""
    labels = [list(g.labels) for g in graphs]
    rows, cols = [], []
    offset = 0
    for it in range(h + 1):
        if it > 0:
            table = {}
            new = []
            for g, lab in zip(graphs, labels):
                sig = [(lab[u], tuple(sorted(lab[v] for v in g.adj[u])))
                       for u in range(g.n_vertices)]
                new.append([table.setdefault(s, len(table)) for s in sig])
            labels = new
            n_labels = len(table)
        else:
            n_labels = 1 + max((max(l) for l in labels if l), default=-1)
        for gi, lab in enumerate(labels):
            rows.extend([gi] * len(lab))
            cols.extend(offset + l for l in lab)
        offset += n_labels
    data = np.ones(len(rows))
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(graphs), offset))


def wl_subtree_kernel(dataset, h=3):
    """Gram matrix of the WL subtree kernel summed over iterations 0..h."""
    graphs = dataset.graphs if isinstance(dataset, GraphDataset) else dataset
    phi = wl_features(graphs, h)
    return np.asarray((phi @ phi.T).todense(), dtype=float)


def kernel_distances(kernel):
    """Feature-space distances sqrt(k_ii - 2 k_ij + k_jj)."""
    d = np.diag(kernel)
    sq = d[:, None] - 2.0 * kernel + d[None, :]
    return np.sqrt(np.maximum(sq, 0.0))


@dataclass
class PairSystem:
    """Per-sample similar (S) and dissimilar (D) neighbour index arrays.

    ``similar[i]`` and ``dissimilar[i]`` hold K sample indices each. The
    margins follow the loss convention: dissimilar pairs should be at
    distance at least ``L``, similar pairs at most ``U``.
    """

    similar: np.ndarray
    dissimilar: np.ndarray
    L: float = 1.0
    U: float = 0.0

    @property
    def n(self):
        return self.similar.shape[0]

    @property
    def K(self):
        return self.similar.shape[1]


def _nearest(dist_row, candidates, K):
    order = np.lexsort((candidates, dist_row[candidates]))
    return candidates[order[:K]]


def select_pair_sets(kernel, labels, K=10, L=1.0, U=0.0):
    """K nearest same-class and K nearest other-class samples per sample.

    Distances come from the kernel; equal distances go to the smaller index.
    """
    if U > L:
        raise ValueError(f"U ({U}) must not exceed L ({L})")
    labels = np.asarray(labels)
    n = len(labels)
    dist = kernel_distances(np.asarray(kernel, dtype=float))
    idx = np.arange(n)
    for c in np.unique(labels):
        size = int(np.sum(labels == c))
        if size <= K:
            raise PairSelectionError(
                f"class {c} has {size} samples; need more than K={K} for similar pairs")
        if n - size < K:
            raise PairSelectionError(
                f"only {n - size} samples outside class {c}; need K={K} dissimilar pairs")
    similar = np.empty((n, K), dtype=np.int64)
    dissimilar = np.empty((n, K), dtype=np.int64)
    for i in range(n):
        same = idx[(labels == labels[i]) & (idx != i)]
        other = idx[labels != labels[i]]
        similar[i] = _nearest(dist[i], same, K)
        dissimilar[i] = _nearest(dist[i], other, K)
    return PairSystem(similar, dissimilar, float(L), float(U))


def select_triplets(kernel, labels, k=4):
    """Triplets (i, j, l) pairing each of k same-class with each of k other-class neighbours."""
    pairs = select_pair_sets(kernel, labels, K=k)
    trip = [(i, j, l) for i in range(pairs.n)
            for j in pairs.similar[i] for l in pairs.dissimilar[i]]
    return np.asarray(trip, dtype=np.int64).reshape(-1, 3)
