"""Pattern trees for graphs, itemsets and sequences."""

from .counting import (distinct_occurrences, enumerate_for_test,
                       exact_nonoverlap_count)
from .dfscode import (MalformedCodeError, code_from_text, code_graph, code_less,
                      code_to_text, edge_less, is_minimum_dfs_code, n_vertices,
                      rightmost_path, validate_code)
from .gspan import (GRAPH_FEATURE_MODES, GraphPatternTree, approx_count,
                    code_embeddings, code_pattern_graph)
from .itemsets import (ItemsetTree, SequenceTree, itemset_children,
                       nonoverlap_subsequence_count, sequence_children)
from .tree import BackendMismatchError, PatternNode, PatternTree


def expand_children(tree, node):
    """Children of ``node`` in canonical order; created once, then reused."""
    return tree.children(node)


__all__ = [
    "BackendMismatchError", "GRAPH_FEATURE_MODES", "GraphPatternTree", "ItemsetTree",
    "MalformedCodeError", "PatternNode", "PatternTree", "SequenceTree", "approx_count", "code_embeddings",
    "code_from_text", "code_graph", "code_less", "code_pattern_graph", "code_to_text",
    "distinct_occurrences", "edge_less", "enumerate_for_test", "exact_nonoverlap_count",
    "expand_children", "is_minimum_dfs_code", "itemset_children", "n_vertices",
    "nonoverlap_subsequence_count", "rightmost_path", "sequence_children", "validate_code",
]
