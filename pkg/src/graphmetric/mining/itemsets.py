"""Itemset and sequence pattern trees."""

import math

import numpy as np

from .tree import BackendMismatchError, PatternTree


class ItemsetTree(PatternTree):
    """Tree of itemsets; a child extends its parent by one item larger than its maximum.

    The feature of itemset ``H`` in sample ``X`` is ``1`` when ``H`` is a
    subset of ``X``.
    """

    backend = "itemset"

    def __init__(self, transactions, max_pattern_size=4):
        self.transactions = [frozenset(int(i) for i in t) for t in transactions]
        super().__init__(len(self.transactions), max_pattern_size, binary=True)
        self.items = sorted(set().union(*self.transactions)) if self.transactions else []

    def _specs(self, key, samples):
        if len(key) >= self.max_pattern_size:
            return []
        lo = key[-1] if key else None
        specs = []
        for item in self.items:
            if lo is not None and item <= lo:
                continue
            hit = [s for s in samples if item in self.transactions[s]]
            if not hit:
                continue
            col = np.zeros(self.n_samples)
            col[hit] = 1.0
            specs.append((key + (item,), len(key) + 1, col, hit))
        return specs

    def _root_specs(self):
        return self._specs((), list(range(self.n_samples)))

    def _child_specs(self, node):
        return self._specs(node.key, node.support)


def nonoverlap_subsequence_count(pattern, seq):
    """Largest number of occurrences of ``pattern`` as a gapped subsequence of
    ``seq`` whose position spans do not overlap.

    Greedy earliest-finishing matching is optimal here (interval scheduling).
    """
    if not pattern:
        return 0
    count, k = 0, 0
    for item in seq:
        if item == pattern[k]:
            k += 1
            if k == len(pattern):
                count += 1
                k = 0
    return count


class SequenceTree(PatternTree):
    """Tree of sequences; a child appends one item to its parent.

    ``feature_mode`` is ``'indicator'`` (occurs at all) or ``'log'``
    (``log(1 + count)`` with the non-overlapping occurrence count).
    """

    backend = "sequence"

    def __init__(self, sequences, max_pattern_size=4, feature_mode="log"):
        if feature_mode not in ("indicator", "log"):
            raise ValueError(f"unknown sequence feature mode {feature_mode!r}")
        self.sequences = [tuple(int(i) for i in s) for s in sequences]
        super().__init__(len(self.sequences), max_pattern_size,
                         binary=feature_mode == "indicator")
        self.feature_mode = feature_mode
        self.items = sorted(set().union(*map(set, self.sequences))) if self.sequences else []

    def _specs(self, key, samples):
        if len(key) >= self.max_pattern_size:
            return []
        specs = []
        for item in self.items:
            child = key + (item,)
            counts = {s: nonoverlap_subsequence_count(child, self.sequences[s]) for s in samples}
            hit = [s for s, c in counts.items() if c > 0]
            if not hit:
                continue
            col = np.zeros(self.n_samples)
            for s in hit:
                col[s] = 1.0 if self.feature_mode == "indicator" else math.log1p(counts[s])
            specs.append((child, len(child), col, hit))
        return specs

    def _root_specs(self):
        return self._specs((), list(range(self.n_samples)))

    def _child_specs(self, node):
        return self._specs(node.key, node.support)


def itemset_children(tree, node):
    if getattr(tree, "backend", None) != "itemset":
        raise BackendMismatchError(f"itemset_children needs an itemset tree, got {tree.backend!r}")
    return tree.children(node)


def sequence_children(tree, node):
    if getattr(tree, "backend", None) != "sequence":
        raise BackendMismatchError(f"sequence_children needs a sequence tree, got {tree.backend!r}")
    return tree.children(node)
