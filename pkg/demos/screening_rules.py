"""Screen single patterns and prune whole subtrees with a dual sphere.

Given a ball guaranteed to hold the optimal dual variable, a pattern whose
score stays at or below lambda over the whole ball has zero weight, and a
subtree whose pruning bound stays below lambda can be skipped unexplored.
"""

import numpy as np

from _data import MUTAG_DIR
from graphmetric import (ColumnSpace, GraphPatternTree, load_tu_dataset, select_pair_sets,
                         wl_subtree_kernel)
from graphmetric import screening as sc
from graphmetric.solver import (alpha_of_m, dual_objective, primal_objective,
                                solve_subproblem)

ds = load_tu_dataset(MUTAG_DIR, "MUTAG")
cols = ColumnSpace.from_pairs(select_pair_sets(wl_subtree_kernel(ds), ds.y, 5))
tree = GraphPatternTree(ds.graphs, max_pattern_size=4)
nodes = tree.expand_all()
Ct = cols.matrix(np.column_stack([nd.column for nd in nodes]))

lam_max = float((Ct.T @ (2 * np.maximum(cols.t, 0))).max())
lam = 0.5 * lam_max
rough = solve_subproblem(Ct, cols.t, lam, eps=1e-2)
alpha = alpha_of_m(Ct, cols.t, rough.m)
q, r = sc.dgb(alpha, primal_objective(Ct, cols.t, rough.m, lam, 1.0),
              dual_objective(Ct, cols.t, alpha, lam, 1.0))
print(f"lambda = {lam:.2f}; duality-gap ball radius {r:.3f} from a rough solve")

screened = sum(sc.ss_test(cols, nd.column, q, r, lam) for nd in nodes)
pruned = [nd for nd in nodes if sc.sp_test(cols, nd.column, q, r, lam, "binary")]
covered = {d.id for nd in pruned for d in tree.iter_subtree(nd)} | {nd.id for nd in pruned}
exact = solve_subproblem(Ct, cols.t, lam, eps=1e-12).m
print(f"{len(nodes)} patterns: {screened} screened, {len(pruned)} subtree roots prunable "
      f"covering {len(covered)} patterns")
print(f"nonzero weights among screened or pruned patterns: "
      f"{sum(exact[i] > 0 for i, nd in enumerate(nodes) if nd.id in covered)}")

# the range form gives, per pattern, how far lambda may fall before the test fails
x = nodes[0].column
opt = solve_subproblem(Ct, cols.t, lam, eps=1e-12)
for name, lo in (("screened", sc.rss_lambda(cols, x, opt.alpha, lam)),
                 ("subtree pruned", sc.rsp_lambda(cols, x, opt.alpha, lam, mode="binary"))):
    if lo <= lam:
        print(f"pattern 0 stays {name} for every lambda in [{lo:.2f}, {lam:.2f}]")
    else:
        print(f"pattern 0 is not {name} at lambda {lam:.2f}")
