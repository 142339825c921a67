"""CART decision trees (Gini) and bagged random forests built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import ClassifierSpec, LearnError, register

__all__ = ["DecisionTree", "RandomForest", "grow_tree", "tree_leaf_values", "best_split"]


def _midpoint(a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    # adjacent floats can round the midpoint up onto b
    return a if mid >= b else mid


def best_split(Z: np.ndarray, onehot: np.ndarray, features: np.ndarray):
    """Lowest weighted-Gini split of the rows over the given feature columns.

    Returns ``(feature, threshold)`` or None when every candidate column is
    constant. Ties go to the lowest feature index, then the smallest
    threshold.
    """
    m = Z.shape[0]
    features = np.sort(features)
    cols = Z[:, features]
    order = np.argsort(cols, axis=0, kind="stable")
    vals = np.take_along_axis(cols, order, axis=0)
    left = np.cumsum(onehot[order], axis=0)[:-1]          # (m-1, q, C)
    total = onehot.sum(axis=0)
    right = total - left
    n_left = np.arange(1, m, dtype=float)[:, None]
    n_right = m - n_left
    # n * weighted Gini impurity of the two children
    impurity = (n_left - (left ** 2).sum(axis=2) / n_left) + \
               (n_right - (right ** 2).sum(axis=2) / n_right)
    valid = vals[:-1] < vals[1:]
    impurity = np.where(valid, impurity, np.inf)
    if not np.isfinite(impurity).any():
        return None
    pos = np.argmin(impurity, axis=0)                      # first = smallest threshold
    per_feature = impurity[pos, np.arange(len(features))]
    j = int(np.argmin(per_feature))                        # first = lowest feature index
    i = int(pos[j])
    return int(features[j]), _midpoint(float(vals[i, j]), float(vals[i + 1, j]))


def grow_tree(Z: np.ndarray, y: np.ndarray, n_classes: int,
              max_features: Optional[int] = None,
              rng: Optional[np.random.Generator] = None) -> dict:
    """Grow an unpruned tree to purity.

    With ``max_features`` set, each node draws that many candidate columns;
    if all of them are constant on the node it keeps drawing from the rest.
    """
    d = Z.shape[1]
    onehot = np.eye(n_classes)[y]
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(onehot[idx].sum(axis=0))
        return len(feature) - 1

    root = new_node(np.arange(Z.shape[0]))
    stack = [(root, np.arange(Z.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size < 2 or np.count_nonzero(counts[node]) < 2:
            continue
        if max_features is None:
            split = best_split(Z[idx], onehot[idx], np.arange(d))
        else:
            perm = rng.permutation(d)
            split = None
            for start in range(0, d, max_features):
                split = best_split(Z[idx], onehot[idx], perm[start:start + max_features])
                if split is not None:
                    break
        if split is None:
            continue
        f, t = split
        go_left = Z[idx, f] <= t
        feature[node], threshold[node] = f, t
        li, ri = new_node(idx[go_left]), new_node(idx[~go_left])
        left[node], right[node] = li, ri
        stack.append((ri, idx[~go_left]))
        stack.append((li, idx[go_left]))
    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=float),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "counts": np.array(counts, dtype=float),
    }


def tree_leaf_values(tree: dict, Z: np.ndarray) -> np.ndarray:
    """Class proportions at the leaf each row lands in."""
    node = np.zeros(Z.shape[0], dtype=np.int64)
    feature, threshold = tree["feature"], tree["threshold"]
    rows = np.arange(Z.shape[0])
    while True:
        inner = feature[node] >= 0
        if not inner.any():
            break
        r = rows[inner]
        n = node[inner]
        go_left = Z[r, feature[n]] <= threshold[n]
        node[r] = np.where(go_left, tree["left"][n], tree["right"][n])
    c = tree["counts"][node]
    return c / c.sum(axis=1, keepdims=True)


@register
@dataclass(frozen=True)
class DecisionTree(ClassifierSpec):
    criterion: str = "gini"

    name = "dt"
    probabilistic = True

    def __post_init__(self):
        if self.criterion != "gini":
            raise LearnError("only the gini criterion is supported")

    def train(self, Z, y, n_classes, seed):
        return grow_tree(Z, y, n_classes)

    def scores(self, params, Z):
        return tree_leaf_values(params, Z)


@register
@dataclass(frozen=True)
class RandomForest(ClassifierSpec):
    """Bootstrap-aggregated Gini trees with ``floor(sqrt(d))`` candidate features per split.

    Tree ``i`` draws its bootstrap sample and feature subsets from the
    ``i``-th child of the master seed, so results do not depend on the
    order trees are built in.
    """

    n_trees: int = 100
    criterion: str = "gini"

    name = "rf"
    probabilistic = True

    def __post_init__(self):
        if int(self.n_trees) != self.n_trees or self.n_trees < 1:
            raise LearnError("n_trees must be a positive integer")
        if self.criterion != "gini":
            raise LearnError("only the gini criterion is supported")

    def train(self, Z, y, n_classes, seed):
        n, d = Z.shape
        q = max(1, math.isqrt(d))
        trees = []
        for child in np.random.SeedSequence(seed).spawn(self.n_trees):
            rng = np.random.default_rng(child)
            boot = rng.integers(0, n, n)
            trees.append(grow_tree(Z[boot], y[boot], n_classes, q, rng))
        return {"trees": trees}

    def scores(self, params, Z):
        total = sum(tree_leaf_values(t, Z) for t in params["trees"])
        return total / len(params["trees"])
