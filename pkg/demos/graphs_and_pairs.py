"""Load a TU dataset, compare graphs with a WL kernel and pick training pairs.

Every graph gets K same-class neighbours (pulled together) and K
other-class neighbours (pushed apart); neighbours are the nearest graphs
under the WL subtree kernel distance.
"""

import numpy as np

from _data import MUTAG_DIR
from graphmetric import ColumnSpace, load_tu_dataset, select_pair_sets, wl_subtree_kernel

ds = load_tu_dataset(MUTAG_DIR, "MUTAG")
sizes = [g.n_vertices for g in ds.graphs]
print(f"{len(ds)} graphs, {ds.n_vertex_labels} vertex labels, "
      f"{min(sizes)}-{max(sizes)} vertices, class counts {np.bincount(ds.y).tolist()}")

kernel = wl_subtree_kernel(ds, 3)
print(f"kernel {kernel.shape}, symmetric {np.allclose(kernel, kernel.T)}, "
      f"min eigenvalue {np.linalg.eigvalsh(kernel).min():.2e}")

pairs = select_pair_sets(kernel, ds.y, K=5)
print(f"graph 0 (class {ds.y[0]}): similar {pairs.similar[0].tolist()}, "
      f"dissimilar {pairs.dissimilar[0].tolist()}")

cols = ColumnSpace.from_pairs(pairs)
print(f"{cols.n_cols} loss terms: {np.sum(cols.t > 0)} with target L={pairs.L}, "
      f"{np.sum(cols.t <= 0)} with target -U={-pairs.U}")
