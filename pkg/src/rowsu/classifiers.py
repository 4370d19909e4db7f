"""k nearest neighbours and a compact random forest (Gini CART on bootstraps)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import NEG, POS, DatasetError
from .seeding import rng_for


# --------------------------------------------------------------------------
# kNN
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int = 5

    def __post_init__(self):
        if self.X.shape[0] == 0:
            raise DatasetError("empty kNN model")
        if not 1 <= self.k <= self.X.shape[0]:
            raise ValueError(f"k must lie in [1, {self.X.shape[0]}], got {self.k}")

    def predict(self, X) -> np.ndarray:
        return knn_predict(self, X)


def knn_fit(X, y, k: int = 5) -> KnnModel:
    return KnnModel(np.asarray(X, dtype=float), np.asarray(y, dtype=np.int8), int(k))


def knn_predict(model: KnnModel, x) -> np.ndarray:
    """Majority label of the k nearest training rows (Euclidean).

    Accepts one sample or a matrix of samples.  Equidistant neighbours are
    taken in training order; a tied vote goes to neg.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    Q = x[None, :] if single else x
    if Q.shape[1] != model.X.shape[1]:
        raise ValueError(f"expected {model.X.shape[1]} features, got {Q.shape[1]}")
    d2 = ((Q[:, None, :] - model.X[None, :, :]) ** 2).sum(axis=2)
    # stable sort keeps lower training index first among equal distances
    nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
    votes_pos = model.y[nearest].sum(axis=1)
    pred = (2 * votes_pos > model.k).astype(np.int8)
    return pred[0] if single else pred


# --------------------------------------------------------------------------
# Decision tree
# --------------------------------------------------------------------------


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: Optional["_Node"] = None
    right: Optional["_Node"] = None
    label: int = NEG
    n: int = 0


def _gini(n_pos, n):
    q = n_pos / n
    return 2.0 * q * (1.0 - q)


def _majority(y):
    return POS if 2 * int(y.sum()) > y.size else NEG


def _best_split(X, y, features, min_leaf):
    """Best (gini, feature, threshold) among ``features``; None if no valid split."""
    n = y.size
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        left_pos = np.cumsum(ys)[:-1]
        n_left = np.arange(1, n)
        valid = xs[1:] > xs[:-1]
        valid &= (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        right_pos = ys.sum() - left_pos
        n_right = n - n_left
        ql = left_pos / n_left
        qr = right_pos / n_right
        impurity = (n_left * 2 * ql * (1 - ql) + n_right * 2 * qr * (1 - qr)) / n
        impurity = np.where(valid, impurity, np.inf)
        k = int(np.argmin(impurity))
        if best is None or impurity[k] < best[0]:
            best = (float(impurity[k]), int(f), float((xs[k] + xs[k + 1]) / 2))
    return best


def grow_tree(X, y, rng: np.random.Generator, mtry: int, min_leaf: int = 1) -> _Node:
    """CART grown to purity, drawing ``mtry`` candidate features per split."""
    p = X.shape[1]
    root = _Node()
    stack = [(root, np.arange(y.size))]
    while stack:
        node, rows = stack.pop()
        ys = y[rows]
        node.n = rows.size
        node.label = _majority(ys)
        n_pos = int(ys.sum())
        if n_pos == 0 or n_pos == rows.size or rows.size < 2 * min_leaf:
            continue
        features = rng.choice(p, size=min(mtry, p), replace=False)
        split = _best_split(X[rows], ys, features, min_leaf)
        if split is None or split[0] >= _gini(n_pos, rows.size):
            continue
        _, f, thr = split
        go_left = X[rows, f] <= thr
        node.feature, node.threshold = f, thr
        node.left, node.right = _Node(), _Node()
        stack.append((node.right, rows[~go_left]))
        stack.append((node.left, rows[go_left]))
    return root


def tree_predict(node: _Node, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty(X.shape[0], dtype=np.int8)
    for i, x in enumerate(X):
        cur = node
        while cur.left is not None:
            cur = cur.left if x[cur.feature] <= cur.threshold else cur.right
        out[i] = cur.label
    return out


# --------------------------------------------------------------------------
# Forest
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    bootstraps: tuple
    n_features: int
    mtry: int
    min_leaf: int
    seed: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def votes(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.sum([tree_predict(t, X) for t in self.trees], axis=0)

    def predict(self, X) -> np.ndarray:
        return forest_predict(self, X)


def forest_fit(
    X,
    y,
    n_trees: int = 500,
    seed: int = 0,
    min_leaf: int = 1,
    mtry: Optional[int] = None,
) -> ForestModel:
    """Bagged Gini trees; tree t draws its bootstrap and feature subsets from
    the stream keyed by ``(seed, t)``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int8)
    n, p = X.shape
    n_pos = int(y.sum())
    if n_pos < 2 or n - n_pos < 2:
        raise DatasetError(f"forest needs >= 2 samples per class, got neg={n - n_pos}, pos={n_pos}")
    mtry = max(1, math.ceil(math.sqrt(p))) if mtry is None else int(mtry)
    trees, boots = [], []
    for t in range(n_trees):
        rng = rng_for(seed, t)
        rows = rng.integers(0, n, size=n)
        trees.append(grow_tree(X[rows], y[rows], rng, mtry, min_leaf))
        boots.append(rows)
    return ForestModel(tuple(trees), tuple(boots), p, mtry, min_leaf, seed)


def forest_predict(model: ForestModel, x) -> np.ndarray:
    """Majority vote over trees; a tied vote goes to neg."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    votes = model.votes(x)
    pred = (2 * votes > model.n_trees).astype(np.int8)
    return pred[0] if single else pred


def oob_predict(model: ForestModel, X) -> np.ndarray:
    """Out-of-bag vote for each training row (-1 where no tree left it out)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    pos_votes = np.zeros(n)
    n_votes = np.zeros(n)
    for tree, rows in zip(model.trees, model.bootstraps):
        oob = np.ones(n, dtype=bool)
        oob[rows] = False
        if oob.any():
            pos_votes[oob] += tree_predict(tree, X[oob])
            n_votes[oob] += 1
    pred = np.where(2 * pos_votes > n_votes, POS, NEG).astype(np.int8)
    return np.where(n_votes > 0, pred, -1)
