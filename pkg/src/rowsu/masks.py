"""Core intervals, gene masks, overlap (POS) scores and greedy minimum subset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NEG, POS, ExpressionDataset


@dataclass(frozen=True, eq=False)
class CoreIntervals:
    """Per-class robust value ranges; ``low[c, j]``/``high[c, j]`` for class c."""

    low: np.ndarray
    high: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.high - self.low


@dataclass(frozen=True, eq=False)
class PosScore:
    values: np.ndarray
    dominant_class: np.ndarray


def core_intervals(train: ExpressionDataset) -> CoreIntervals:
    """IQR whisker interval ``[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`` per class and gene,
    clamped to the class's observed range.  Quartiles use linear
    interpolation between order statistics (numpy's default method).
    """
    train.require_both_classes(2)
    low = np.empty((2, train.p))
    high = np.empty((2, train.p))
    for c in (NEG, POS):
        x = train.class_values(c)
        q1, q3 = np.percentile(x, [25, 75], axis=0)
        iqr = q3 - q1
        low[c] = np.maximum(q1 - 1.5 * iqr, x.min(axis=0))
        high[c] = np.minimum(q3 + 1.5 * iqr, x.max(axis=0))
    return CoreIntervals(low, high)


def gene_masks(train: ExpressionDataset, iv: CoreIntervals) -> np.ndarray:
    """Boolean (p, n) matrix; True where the sample sits inside its own class
    interval and outside the other class's interval (bounds inclusive).
    """
    x = train.values
    own = train.labels.astype(int)
    other = 1 - own
    inside_own = (x >= iv.low[own]) & (x <= iv.high[own])
    inside_other = (x >= iv.low[other]) & (x <= iv.high[other])
    return (inside_own & ~inside_other).T


def pos_scores(train: ExpressionDataset, iv: CoreIntervals, masks=None) -> PosScore:
    """Fraction of all samples lying in the overlap of the two class intervals.

    The dominant class of a gene is the class with more unambiguous (mask=1)
    samples; ties go to the class with the wider interval, then to neg.
    """
    if masks is None:
        masks = gene_masks(train, iv)
    lo = np.maximum(iv.low[NEG], iv.low[POS])
    hi = np.minimum(iv.high[NEG], iv.high[POS])
    x = train.values
    in_overlap = (x >= lo) & (x <= hi)
    counts = in_overlap.sum(axis=0)
    pos = np.where(lo <= hi, counts / train.n, 0.0)

    is_pos = train.pos_mask
    cover_pos = masks[:, is_pos].sum(axis=1)
    cover_neg = masks[:, ~is_pos].sum(axis=1)
    width = iv.width
    dominant = np.where(
        cover_pos != cover_neg,
        np.where(cover_pos > cover_neg, POS, NEG),
        np.where(width[POS] > width[NEG], POS, NEG),
    ).astype(np.int8)
    return PosScore(pos, dominant)


def greedy_min_subset(masks, pos, max_genes=None) -> list:
    """Greedy set cover over gene masks.

    Repeatedly picks the gene with the most 1-bits in its current mask (ties:
    smaller POS score, then lower index), then clears the newly covered
    samples from every mask.  Stops after ``max_genes`` picks or when no
    mask has a 1-bit left.  ``pos`` may be a :class:`PosScore` or an array.
    """
    work = np.array(masks, dtype=bool, copy=True)
    if work.ndim != 2 or work.shape[0] == 0:
        raise ValueError("greedy_min_subset needs at least one gene mask")
    pos_vals = np.asarray(pos.values if isinstance(pos, PosScore) else pos, dtype=float)
    if pos_vals.shape != (work.shape[0],):
        raise ValueError("POS scores and masks disagree on the number of genes")
    limit = work.shape[0] if max_genes is None else min(int(max_genes), work.shape[0])

    # Candidate priority: most bits, then smallest POS, then lowest index.
    # lexsort's last key is primary, so the index is the implicit final key.
    tie_rank = np.empty(work.shape[0], dtype=int)
    tie_rank[np.lexsort((np.arange(work.shape[0]), pos_vals))] = np.arange(work.shape[0])

    chosen = []
    counts = work.sum(axis=1)
    while len(chosen) < limit:
        best = counts.max()
        if best == 0:
            break
        cands = np.flatnonzero(counts == best)
        g = int(cands[np.argmin(tie_rank[cands])])
        chosen.append(g)
        covered = work[g].copy()
        work[:, covered] = False
        counts = work.sum(axis=1)
    return chosen


def cover_gains(masks, order) -> np.ndarray:
    """Number of newly covered samples contributed by each gene in ``order``."""
    covered = np.zeros(np.shape(masks)[1], dtype=bool)
    gains = []
    for g in order:
        new = masks[g] & ~covered
        gains.append(int(new.sum()))
        covered |= new
    return np.array(gains, dtype=float)
