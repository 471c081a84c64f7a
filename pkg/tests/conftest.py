import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def write_tu(directory, name, graphs, classes, edge_labels=True):
    """Write graphs given as (vertex_labels, [(u, v, e), ...]) in TU text format."""
    os.makedirs(directory, exist_ok=True)
    A, el, ind, nl = [], [], [], []
    offset = 0
    for g, (labels, edges) in enumerate(graphs, 1):
        for l in labels:
            ind.append(str(g))
            nl.append(str(l))
        for u, v, e in edges:
            A.append(f"{u + 1 + offset}, {v + 1 + offset}")
            A.append(f"{v + 1 + offset}, {u + 1 + offset}")
            el.extend([str(e), str(e)])
        offset += len(labels)

    def put(suffix, lines):
        with open(os.path.join(directory, f"{name}_{suffix}.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")

    put("A", A)
    put("graph_indicator", ind)
    put("node_labels", nl)
    put("graph_labels", [str(c) for c in classes])
    if edge_labels:
        put("edge_labels", el)
