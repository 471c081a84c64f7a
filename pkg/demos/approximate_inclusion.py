"""Approximate subgraph inclusion features.

ASIF replaces exact subgraph isomorphism with a test on hierarchical
neighbourhood labels; it is 1 whenever the pattern really occurs. The
similarity version scores near misses through a label dissimilarity.
"""

import math

import numpy as np

from _data import MUTAG_DIR
from graphmetric import Graph, load_tu_dataset
from graphmetric import asif

A, B, C = 0, 1, 2
G = Graph([A, B, C], [(0, 1, 0), (1, 2, 0)])   # A - B - C
P = Graph([A, B], [(0, 1, 0)])                 # A - B
Q = Graph([A, C], [(0, 1, 0)])                 # A - C, absent from G

print("level-3 label of the A vertex in A-B-C:", asif.wl_relabel(G, 3)[2][0])
print(f"ASIF(A-B, G) = {asif.asif_feature(P, G)}, ASIF(A-C, G) = {asif.asif_feature(Q, G)}")

D = np.array([[0.0, 0.9, 0.9], [0.9, 0.0, 0.1], [0.9, 0.1, 0.0]])
cfg = asif.SimAsifConfig(T=3, rho=1.0, threshold=0.3)
print(f"sim-ASIF(A-C, G) with d(B, C) small = {asif.sim_asif_feature(Q, G, D, cfg):.3f} "
      f"(transformation cost {asif.global_cost(Q, G, D, 3):.2f})")

inf = np.full((3, 3), math.inf)
np.fill_diagonal(inf, 0.0)
print(f"with infinite off-diagonal costs sim-ASIF reduces to ASIF: "
      f"{asif.sim_asif_feature(Q, G, inf, cfg)}")

ds = load_tu_dataset(MUTAG_DIR, "MUTAG")
Dm = asif.build_dissimilarity_from_adjacency(ds.graphs)
names = ds.vertex_label_names
print("label dissimilarities from adjacency profiles:")
for i, a in enumerate(names):
    print("  " + str(a).ljust(4) + " ".join(f"{Dm[i, j]:.2f}" for j in range(len(names))))
