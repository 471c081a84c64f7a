"""Grow the subgraph pattern tree lazily and inspect feature columns.

Each node is a connected pattern identified by its minimum DFS code. Its
column holds the pattern's value in every graph, which can only shrink
from parent to child; that monotonicity is what makes subtree pruning safe.
"""

import numpy as np

from _data import MUTAG_DIR
from graphmetric import GraphPatternTree, load_tu_dataset
from graphmetric.mining import code_to_text

ds = load_tu_dataset(MUTAG_DIR, "MUTAG")
names = ds.vertex_label_names

for mode in ("indicator", "log-approx"):
    tree = GraphPatternTree(ds.graphs, max_pattern_size=4, feature_mode=mode)
    roots = tree.children(tree.root)
    print(f"[{mode}] {len(roots)} single-edge patterns; "
          f"{len(tree.nodes)} nodes materialised so far")
    nodes = tree.expand_all()
    worst = max(np.max(nd.column - nd.parent.column) for nd in nodes
                if nd.parent is not tree.root)
    print(f"[{mode}] full tree up to 4 vertices: {len(nodes)} patterns, "
          f"largest child-minus-parent value {worst:g}")

tree = GraphPatternTree(ds.graphs, max_pattern_size=4)
top = sorted(tree.expand_all(), key=lambda nd: -nd.column.sum())[:5]
for nd in top:
    labels = {e[0]: e[2] for e in nd.key} | {e[1]: e[4] for e in nd.key}
    verts = " ".join(f"v{v}:{names[l]}" for v, l in sorted(labels.items()))
    print(f"support {int(nd.column.sum()):3d}  {verts}  code {code_to_text(nd.key)}")

node = tree.nodes[0]
g = next(iter(node.support))
print(f"pattern 0 in graph {g}: {tree.embedding_count(node, g)} embeddings, "
      f"{tree.approx_nonoverlap_count(node, g)} distinct first-edge images")
