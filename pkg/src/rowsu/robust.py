"""Robust Fisher score: medians over mean absolute deviations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NEG, POS, DatasetError, ExpressionDataset
from .ranking import INF_SCORE, RankedGenes, rank_by_score


@dataclass(frozen=True, eq=False)
class ClassSummary:
    med_pos: np.ndarray
    med_neg: np.ndarray
    med_all: np.ndarray
    dev_pos: np.ndarray
    dev_neg: np.ndarray
    n_pos: int
    n_neg: int


def class_summary(train: ExpressionDataset, deviation: str = "mean") -> ClassSummary:
    """Per-gene class medians, global median and the absolute deviation of
    each class about its own median, averaged (``deviation="mean"``) or
    taking its median (``"median"``)."""
    if deviation not in ("mean", "median"):
        raise ValueError(f"deviation must be 'mean' or 'median', got {deviation!r}")
    spread = np.mean if deviation == "mean" else np.median
    if train.n_pos == 0 or train.n_neg == 0:
        raise DatasetError("class_summary needs both classes to be non-empty")
    xp = train.class_values(POS)
    xn = train.class_values(NEG)
    med_pos = np.median(xp, axis=0)
    med_neg = np.median(xn, axis=0)
    return ClassSummary(
        med_pos=med_pos,
        med_neg=med_neg,
        med_all=np.median(train.values, axis=0),
        dev_pos=spread(np.abs(xp - med_pos), axis=0),
        dev_neg=spread(np.abs(xn - med_neg), axis=0),
        n_pos=xp.shape[0],
        n_neg=xn.shape[0],
    )


def rfish_values(summary: ClassSummary, balanced: bool = True) -> np.ndarray:
    """Score vector; 0/0 gives 0 and x/0 (x > 0) gives ``inf``.

    ``balanced=False`` weights each class term by its sample count.
    """
    s = summary
    a = np.abs(s.med_pos - s.med_all)
    b = np.abs(s.med_neg - s.med_all)
    if balanced:
        num = a + b
        den = s.dev_pos + s.dev_neg
    else:
        num = s.n_pos * a + s.n_neg * b
        den = s.n_pos * s.dev_pos + s.n_neg * s.dev_neg
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = num / den
    psi = np.where(den > 0, psi, np.where(num > 0, INF_SCORE, 0.0))
    return psi


def rfish_scores(summary: ClassSummary, balanced: bool = True) -> RankedGenes:
    return rank_by_score(rfish_values(summary, balanced))
