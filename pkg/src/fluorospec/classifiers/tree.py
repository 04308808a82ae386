"""CART decision trees (Gini) and random forests built from them."""
import math

import numpy as np

from .. import kernels, seeding
from .base import TrainedModel


class Tree:
    """Flat array tree. ``feature[i] == -1`` marks a leaf carrying ``value[i]``."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.int64)

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def n_leaves(self):
        return int(np.sum(self.feature < 0))

    def apply(self, X):
        return kernels.tree_apply(X, self.feature, self.threshold, self.left, self.right)

    def predict(self, X):
        return self.value[self.apply(X)]

    def get_state(self):
        return {"feature": self.feature, "threshold": self.threshold, "left": self.left,
                "right": self.right, "value": self.value}


def gini_impurity(counts):
    """``1 - sum p_i^2`` for a vector of class counts."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or np.any(counts < 0):
        raise ValueError("counts must be a 1-D array of non-negative values")
    total = counts.sum()
    if total <= 0:
        raise ValueError("at least one count must be positive")
    # squares summed before the single division: exact for integer counts,
    # so the value does not depend on the order of the classes
    return float(1.0 - np.sum(counts * counts) / (total * total))


def grow_tree(X, y, n_classes, sample_idx=None, max_features=None, rng=None):
    """Grow a tree to purity on rows ``sample_idx`` (which may repeat).

    ``y`` holds class positions in ``[0, n_classes)``. With ``max_features``
    set, each node draws that many candidate features from ``rng``; when none
    of them varies on the node, all features are tried before making a leaf.
    """
    n, d = X.shape
    if sample_idx is None:
        sample_idx = np.arange(n, dtype=np.int64)
    all_features = np.arange(d, dtype=np.int64)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.asarray(sample_idx, dtype=np.int64))]
    while stack:
        node, idx = stack.pop()
        counts = np.bincount(y[idx], minlength=n_classes)
        value[node] = int(np.argmax(counts))
        if counts[value[node]] == idx.shape[0]:
            continue
        if max_features is not None and max_features < d:
            cand = np.sort(rng.choice(d, size=max_features, replace=False)).astype(np.int64)
            f, thr, _ = kernels.best_split(X, y, idx, cand, n_classes)
            if f < 0:
                f, thr, _ = kernels.best_split(X, y, idx, all_features, n_classes)
        else:
            f, thr, _ = kernels.best_split(X, y, idx, all_features, n_classes)
        if f < 0:
            continue
        go_left = X[idx, f] <= thr
        lnode, rnode = new_node(), new_node()
        feature[node], threshold[node] = f, thr
        left[node], right[node] = lnode, rnode
        # right pushed first so the left subtree is numbered first
        stack.append((rnode, idx[~go_left]))
        stack.append((lnode, idx[go_left]))
    return Tree(feature, threshold, left, right, value)


def _vote(preds, n_classes):
    votes = np.zeros((preds.shape[1], n_classes), dtype=np.int64)
    rows = np.arange(preds.shape[1])
    for p in preds:
        votes[rows, p] += 1
    return np.argmax(votes, axis=1)


class DecisionTreeModel(TrainedModel):
    algorithm = "DT"

    def __init__(self, params, classes, n_features, tree):
        super().__init__(params, classes, n_features)
        self.tree = tree

    def _predict(self, X):
        return self.tree.predict(X)

    def get_state(self):
        return self.tree.get_state()

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        return cls(params, classes, n_features, Tree(**state))


class RandomForestModel(TrainedModel):
    algorithm = "RF"

    def __init__(self, params, classes, n_features, trees):
        super().__init__(params, classes, n_features)
        self.trees = list(trees)

    def _predict(self, X):
        return _vote(np.array([t.predict(X) for t in self.trees]), len(self.classes))

    def get_state(self):
        return {"trees": [t.get_state() for t in self.trees]}

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        return cls(params, classes, n_features, [Tree(**t) for t in state["trees"]])


def resolve_max_features(max_features, d):
    if max_features == "sqrt":
        return max(1, int(math.isqrt(d)))
    if max_features is None:
        return d
    return int(max_features)


def fit_dt(X, y, classes, params, seed):
    tree = grow_tree(X, np.searchsorted(classes, y), len(classes))
    return DecisionTreeModel(params, classes, X.shape[1], tree)


def fit_rf(X, y, classes, params, seed):
    """Bootstrap n-of-n per tree; tree ``t`` uses stream ``(seed, "rf-tree", t)``."""
    yy = np.searchsorted(classes, y)
    n, d = X.shape
    mf = resolve_max_features(params["max_features"], d)
    trees = []
    for t in range(int(params["n_trees"])):
        rng = seeding.stream(seed, "rf-tree", t)
        boot = np.sort(rng.integers(0, n, size=n))
        trees.append(grow_tree(X, yy, len(classes), boot, mf, rng))
    return RandomForestModel(params, classes, X.shape[1], trees)
