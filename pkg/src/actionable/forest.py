"""From-scratch random forest: CART trees under Gini impurity.

Determinism contract: per-tree rngs are derived from the master seed, the
bootstrap and per-node feature subsamples come from that stream in a fixed
recursion order (left before right), candidate thresholds are midpoints
between consecutive distinct sorted values, and ties in gain are broken by
lowest feature index then lowest threshold. Two runs with identical inputs
produce identical forests, down to the serialized bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class DegenerateNode(ValueError):
    """Raised when impurity is requested for an empty node."""


class SingleClassError(ValueError):
    """Raised when training data contains only one class."""


@dataclass(frozen=True)
class Leaf:
    fraction: float  # positive fraction of bootstrap rows that reached it

    def __post_init__(self) -> None:
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"leaf fraction out of [0,1]: {self.fraction}")


@dataclass(frozen=True)
class Node:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Node]


@dataclass(frozen=True)
class Forest:
    trees: tuple[TreeNode, ...]
    feature_subsample: int
    seed: int


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    # None resolves to ceil(sqrt(|V|)) at training time.
    feature_subsample: int | None = None

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("need at least one tree")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 when set")
        if self.feature_subsample is not None and self.feature_subsample < 1:
            raise ValueError("feature_subsample must be >= 1 when set")


def gini_impurity(class_counts: tuple[int, int]) -> float:
    n0, n1 = class_counts
    if n0 < 0 or n1 < 0:
        raise ValueError(f"negative class count: {class_counts}")
    total = n0 + n1
    if total == 0:
        raise DegenerateNode("impurity of an empty node is undefined")
    p0 = n0 / total
    p1 = n1 / total
    return 1.0 - (p0 * p0 + p1 * p1)


def _best_split(
    X: np.ndarray, y: np.ndarray, rows: np.ndarray, features: np.ndarray
) -> tuple[float, int, float] | None:
    """Best (gain, feature, threshold) over candidate features, or None.

    Features arrive sorted ascending and each feature's thresholds are
    scanned ascending, so keeping the first strictly-better candidate
    realizes the lowest-feature-then-lowest-threshold tie-break.
    """
    n = len(rows)
    ys = y[rows]
    pos = int(ys.sum())
    parent = gini_impurity((n - pos, pos))
    best: tuple[float, int, float] | None = None
    for f in features:
        values = X[rows, f]
        order = np.argsort(values, kind="stable")
        vs = values[order]
        yo = ys[order]
        # candidate i splits between vs[i] and vs[i+1] when they differ
        cut = np.nonzero(vs[:-1] < vs[1:])[0]
        if len(cut) == 0:
            continue
        pos_prefix = np.cumsum(yo)
        n_left = cut + 1
        pos_left = pos_prefix[cut]
        n_right = n - n_left
        pos_right = pos - pos_left
        pl = pos_left / n_left
        pr = pos_right / n_right
        gini_left = 1.0 - (pl * pl + (1.0 - pl) * (1.0 - pl))
        gini_right = 1.0 - (pr * pr + (1.0 - pr) * (1.0 - pr))
        gains = parent - (n_left * gini_left + n_right * gini_right) / n
        i = int(np.argmax(gains))
        gain = float(gains[i])
        if gain <= 0.0:
            continue
        mid = (vs[cut[i]] + vs[cut[i] + 1]) / 2.0
        # rounding can push the midpoint onto the upper value; clamp so the
        # <= threshold partition stays the one the gain was computed for
        thr = float(mid) if mid < vs[cut[i] + 1] else float(vs[cut[i]])
        if best is None or gain > best[0]:
            best = (gain, int(f), thr)
    return best


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    rng: np.random.Generator,
    params: ForestParams,
    k: int,
    depth: int,
) -> TreeNode:
    n = len(rows)
    pos = int(y[rows].sum())
    if (
        pos == 0
        or pos == n
        or n < params.min_samples_split
        or (params.max_depth is not None and depth >= params.max_depth)
    ):
        return Leaf(fraction=pos / n)
    features = np.sort(rng.choice(X.shape[1], size=k, replace=False))
    found = _best_split(X, y, rows, features)
    if found is None:
        return Leaf(fraction=pos / n)
    _, feature, threshold = found
    mask = X[rows, feature] <= threshold
    left = _grow(X, y, rows[mask], rng, params, k, depth + 1)
    right = _grow(X, y, rows[~mask], rng, params, k, depth + 1)
    return Node(feature=feature, threshold=threshold, left=left, right=right)


def train_forest(
    X: np.ndarray, y: np.ndarray, params: ForestParams, seed: int
) -> Forest:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-d with one label per row")
    if len(X) < 2:
        raise ValueError("need at least two training rows")
    if len(np.unique(y)) < 2:
        raise SingleClassError("training data must contain both classes")
    k = params.feature_subsample or math.ceil(math.sqrt(X.shape[1]))
    k = min(k, X.shape[1])
    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(0, len(X), size=len(X))
        trees.append(_grow(X, y, rows, rng, params, k, depth=0))
    return Forest(trees=tuple(trees), feature_subsample=k, seed=seed)


def _descend(tree: TreeNode, x: np.ndarray) -> float:
    while isinstance(tree, Node):
        tree = tree.left if x[tree.feature] <= tree.threshold else tree.right
    return tree.fraction


def predict_forest(forest: Forest, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return sum(_descend(t, x) for t in forest.trees) / len(forest.trees)


def predict_forest_batch(forest: Forest, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.array([predict_forest(forest, row) for row in X])


def _tree_to_json(tree: TreeNode) -> dict:
    if isinstance(tree, Leaf):
        return {"fraction": tree.fraction}
    return {
        "feature": tree.feature,
        "threshold": tree.threshold,
        "left": _tree_to_json(tree.left),
        "right": _tree_to_json(tree.right),
    }


def _tree_from_json(data: dict) -> TreeNode:
    if "fraction" in data:
        return Leaf(fraction=float(data["fraction"]))
    return Node(
        feature=int(data["feature"]),
        threshold=float(data["threshold"]),
        left=_tree_from_json(data["left"]),
        right=_tree_from_json(data["right"]),
    )


def forest_to_json(forest: Forest) -> dict:
    return {
        "trees": [_tree_to_json(t) for t in forest.trees],
        "feature_subsample": forest.feature_subsample,
        "seed": forest.seed,
    }


def forest_from_json(data: dict) -> Forest:
    return Forest(
        trees=tuple(_tree_from_json(t) for t in data["trees"]),
        feature_subsample=int(data["feature_subsample"]),
        seed=int(data["seed"]),
    )
