"""Ranked gene lists shared by every ranker."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stand-in for "perfect separation" scores (x/0 with x > 0).
INF_SCORE = np.inf


@dataclass(frozen=True, eq=False)
class RankedGenes:
    """Gene indices in selection order with one score per listed gene.

    The first ``n_leading`` entries come from a sequential greedy stage
    (set cover, MRMR forward selection) and carry that stage's own score.
    The remaining entries are sorted by score, descending, ties by
    ascending gene index.
    """

    order: np.ndarray
    scores: np.ndarray
    n_leading: int = 0

    def __post_init__(self):
        order = np.asarray(self.order, dtype=int)
        scores = np.asarray(self.scores, dtype=float)
        if order.shape != scores.shape or order.ndim != 1:
            raise ValueError("order and scores must be 1-D and of equal length")
        if np.unique(order).size != order.size:
            raise ValueError("duplicate gene index in ranking")
        tail = scores[self.n_leading:]
        if tail.size > 1 and np.any(np.diff(tail) > 0):
            raise ValueError("ranked scores must be non-increasing")
        order.setflags(write=False)
        scores.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "scores", scores)

    def __len__(self):
        return self.order.size

    def top(self, k: int) -> np.ndarray:
        return self.order[:k]

    def truncate(self, k: int) -> "RankedGenes":
        return RankedGenes(self.order[:k], self.scores[:k], min(self.n_leading, k))

    def names(self, gene_names) -> list:
        return [gene_names[j] for j in self.order]


def descending_order(scores) -> np.ndarray:
    """Positions sorted by score descending, ties broken by ascending position."""
    scores = np.asarray(scores, dtype=float)
    # lexsort: last key is primary
    return np.lexsort((np.arange(scores.size), -scores))


def rank_by_score(scores) -> RankedGenes:
    """Full descending ranking of a per-gene score vector."""
    scores = np.asarray(scores, dtype=float)
    perm = descending_order(scores)
    return RankedGenes(perm, scores[perm])
