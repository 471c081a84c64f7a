"""Lazily expanded pattern trees shared by the graph, itemset and sequence backends."""

import math

import numpy as np


class BackendMismatchError(TypeError):
    """A backend-specific operation was called on a tree of another backend."""


class PatternNode:
    """One pattern in the tree.

    ``column`` holds the feature value of the pattern in every training
    sample. ``screening`` and ``pruning`` cache the smallest regularisation
    strengths at which the node itself, or its whole subtree, is known to
    have zero weight.
    """

    __slots__ = ("id", "key", "parent", "depth", "size", "column", "support",
                 "children", "screening", "pruning", "__weakref__")

    def __init__(self, id, key, parent, size, column, support):
        self.id = id
        self.key = key
        self.parent = parent
        self.depth = 0 if parent is None else parent.depth + 1
        self.size = size
        self.column = column
        self.support = support
        self.children = None
        self.screening = math.inf
        self.pruning = math.inf

    @property
    def expanded(self):
        return self.children is not None

    def __repr__(self):
        return f"PatternNode(id={self.id}, key={self.key!r})"


class PatternTree:
    """Base class. Subclasses implement ``_child_specs(node)`` and ``_root_specs()``.

    A spec is ``(key, size, column, support)``; ``support`` is whatever the
    backend needs to grow the node later (embeddings, sample lists).
    """

    backend = None

    def __init__(self, n_samples, max_pattern_size, binary):
        self.n_samples = n_samples
        self.max_pattern_size = max_pattern_size
        self.binary = binary
        self.nodes = []
        self.root = PatternNode(-1, None, None, 0, None, None)
        self.root.depth = 0

    def _make(self, parent, key, size, column, support):
        node = PatternNode(len(self.nodes), key, parent, size,
                           np.asarray(column, dtype=float), support)
        self.nodes.append(node)
        return node

    def children(self, node):
        """Children of ``node``, created on first access (idempotent)."""
        if node.children is None:
            specs = self._root_specs() if node is self.root else self._child_specs(node)
            node.children = [self._make(node, *spec) for spec in specs]
        return node.children

    def iter_subtree(self, node=None):
        """Depth-first walk over ``node``'s descendants, expanding everything."""
        node = self.root if node is None else node
        stack = list(reversed(self.children(node)))
        while stack:
            cur = stack.pop()
            yield cur
            stack.extend(reversed(self.children(cur)))

    def expand_all(self):
        return list(self.iter_subtree())

    def reset_caches(self):
        for node in self.nodes:
            node.screening = math.inf
            node.pruning = math.inf

    def key_text(self, key):
        return " ".join(str(k) for k in key)

    def _root_specs(self):
        raise NotImplementedError

    def _child_specs(self, node):
        raise NotImplementedError
