"""Comparison rankers: Fisher, Wilcoxon rank-sum, SNR, POS and MRMR."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .dataset import NEG, POS, ExpressionDataset
from .masks import core_intervals, cover_gains, gene_masks, greedy_min_subset, pos_scores
from .ranking import INF_SCORE, RankedGenes, descending_order, rank_by_score


def _ratio(num, den):
    """num/den with 0/0 -> 0 and x/0 -> inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(den > 0, out, np.where(num > 0, INF_SCORE, 0.0))


def fisher_values(train: ExpressionDataset) -> np.ndarray:
    train.require_both_classes(2)
    xp, xn = train.class_values(POS), train.class_values(NEG)
    n_pos, n_neg = xp.shape[0], xn.shape[0]
    mu = train.values.mean(axis=0)
    num = n_pos * (xp.mean(axis=0) - mu) ** 2 + n_neg * (xn.mean(axis=0) - mu) ** 2
    den = n_pos * xp.var(axis=0, ddof=1) + n_neg * xn.var(axis=0, ddof=1)
    return _ratio(num, den)


def fisher_rank(train: ExpressionDataset) -> RankedGenes:
    return rank_by_score(fisher_values(train))


def wilcoxon_values(train: ExpressionDataset) -> np.ndarray:
    """|W - E[W]| / sd(W) with W the positive-class rank sum (midranks) and the
    tie-corrected null variance."""
    train.require_both_classes()
    x = train.values
    n = x.shape[0]
    n_pos = train.n_pos
    n_neg = n - n_pos
    ranks = rankdata(x, axis=0)
    W = ranks[train.pos_mask].sum(axis=0)
    expected = n_pos * (n + 1) / 2.0
    ties = np.zeros(x.shape[1])
    for j in range(x.shape[1]):
        _, t = np.unique(x[:, j], return_counts=True)
        ties[j] = np.sum(t.astype(float) ** 3 - t)
    var = n_pos * n_neg / 12.0 * ((n + 1) - ties / (n * (n - 1)))
    var = np.where(var > 1e-12 * n_pos * n_neg * (n + 1), var, 0.0)
    return _ratio(np.abs(W - expected), np.sqrt(var))


def wilcoxon_rank(train: ExpressionDataset) -> RankedGenes:
    return rank_by_score(wilcoxon_values(train))


def snr_values(train: ExpressionDataset) -> np.ndarray:
    train.require_both_classes(2)
    xp, xn = train.class_values(POS), train.class_values(NEG)
    num = np.abs(xp.mean(axis=0) - xn.mean(axis=0))
    den = xp.std(axis=0, ddof=1) + xn.std(axis=0, ddof=1)
    return _ratio(num, den)


def snr_rank(train: ExpressionDataset) -> RankedGenes:
    return rank_by_score(snr_values(train))


def pos_rank(train: ExpressionDataset) -> RankedGenes:
    """Greedy minimum subset first, then every other gene by ascending POS.

    Tail scores are reported as ``1 - POS`` so the list is descending.
    """
    iv = core_intervals(train)
    masks = gene_masks(train, iv)
    pos = pos_scores(train, iv, masks)
    subset = greedy_min_subset(masks, pos)
    rest = np.setdiff1d(np.arange(train.p), subset)
    tail = rest[descending_order(1.0 - pos.values[rest])]
    order = np.concatenate([np.asarray(subset, dtype=int), tail])
    scores = np.concatenate([cover_gains(masks, subset), 1.0 - pos.values[tail]])
    return RankedGenes(order, scores, n_leading=len(subset))


# --------------------------------------------------------------------------
# MRMR
# --------------------------------------------------------------------------


def discretize3(x) -> np.ndarray:
    """Per-column 3-level code: 0 below mean - sd, 2 above mean + sd, else 1."""
    x = np.asarray(x, dtype=float)
    mu = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1) if x.shape[0] > 1 else np.zeros(x.shape[1])
    codes = np.ones(x.shape, dtype=np.int8)
    codes[x < mu - sd] = 0
    codes[x > mu + sd] = 2
    return codes


def _mi_against(onehot: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Mutual information (nats) between every column coded in ``onehot``
    (n, p, k) and a single coded vector ``target`` (n, l)."""
    n = onehot.shape[0]
    joint = np.einsum("ipa,ib->pab", onehot, target) / n
    pa = joint.sum(axis=2, keepdims=True)
    pb = joint.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = joint * np.log(joint / (pa * pb))
    return np.nansum(np.where(joint > 0, terms, 0.0), axis=(1, 2))


def mrmr_rank(train: ExpressionDataset, k: int = None) -> RankedGenes:
    """Forward selection of ``k`` genes maximizing relevance minus mean
    redundancy (mutual-information difference), then the remaining genes by
    relevance.  Ties go to the lower gene index.
    """
    p = train.p
    k = p if k is None else int(k)
    if not 0 <= k <= p:
        raise ValueError(f"k = {k} must lie in [0, p={p}]")
    train.require_both_classes()
    codes = discretize3(train.values)
    onehot = (codes[:, :, None] == np.arange(3)).astype(float)
    y1h = (train.labels[:, None] == np.arange(2)).astype(float)
    relevance = _mi_against(onehot, y1h)

    selected, picked_scores = [], []
    redundancy = np.zeros(p)
    available = np.ones(p, dtype=bool)
    for step in range(k):
        score = relevance - (redundancy / step if step else 0.0)
        score = np.where(available, score, -np.inf)
        g = int(np.argmax(score))
        selected.append(g)
        picked_scores.append(float(score[g]))
        available[g] = False
        redundancy += _mi_against(onehot, onehot[:, g, :])

    rest = np.flatnonzero(available)
    tail = rest[descending_order(relevance[rest])]
    order = np.concatenate([np.asarray(selected, dtype=int), tail])
    scores = np.concatenate([picked_scores, relevance[tail]])
    return RankedGenes(order, scores, n_leading=len(selected))
