"""Sparse, interpretable distance metrics over pattern features of graphs,
itemsets and sequences, learned along a regularisation path with safe
screening and pruning of the pattern tree."""

from .features import ColumnSpace, learned_distance
from .graphs import (Graph, GraphDataset, PairSystem, load_tu_dataset, select_pair_sets,
                     select_triplets, wl_subtree_kernel)
from .mining import GraphPatternTree, ItemsetTree, SequenceTree
from .solver import PathConfig, SolveResult, compute_lambda_max, pathwise_optimize

__version__ = "0.1.0"

__all__ = [
    "ColumnSpace", "Graph", "GraphDataset", "GraphPatternTree", "ItemsetTree", "PairSystem",
    "PathConfig", "SequenceTree", "SolveResult", "compute_lambda_max", "learned_distance",
    "load_tu_dataset", "pathwise_optimize", "select_pair_sets", "select_triplets",
    "wl_subtree_kernel",
]
