"""End-to-end ROWSU selection.

balance -> greedy minimum subset over gene masks -> robust Fisher score and
SVM weights on the remaining genes -> phi = |w * psi| -> union.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .balance import BalanceConfig, balance
from .dataset import ExpressionDataset
from .masks import core_intervals, cover_gains, gene_masks, greedy_min_subset, pos_scores
from .ranking import RankedGenes, descending_order
from .robust import class_summary, rfish_values
from .seeding import derive_seed
from .svm import train_linear_svm


@dataclass(frozen=True)
class RowsuConfig:
    """``min_subset_cap`` of None lets the greedy search run until no mask has
    a 1-bit left; it is always additionally capped at ``final_total``."""

    final_total: int = 20
    min_subset_cap: Optional[int] = None
    balance: BalanceConfig = field(default_factory=BalanceConfig)
    svm_C: float = 1.0
    svm_tolerance: float = 1e-3
    svm_scaling: str = "robust"
    seed: int = 0

    def __post_init__(self):
        if self.final_total < 1:
            raise ValueError(f"final_total must be >= 1, got {self.final_total}")
        if self.min_subset_cap is not None and self.min_subset_cap < 0:
            raise ValueError("min_subset_cap must be >= 0")


@dataclass(frozen=True, eq=False)
class RowsuResult:
    ranking: RankedGenes
    balanced: ExpressionDataset
    min_subset: tuple
    remaining: np.ndarray
    psi: np.ndarray
    w: np.ndarray
    phi: np.ndarray


def weighted_score(psi, w) -> np.ndarray:
    """phi = |w * psi|, with inf * 0 taken as 0."""
    psi = np.asarray(psi, dtype=float)
    w = np.abs(np.asarray(w, dtype=float))
    inf = np.isinf(psi)
    with np.errstate(invalid="ignore"):
        phi = np.abs(w * psi)
    return np.where(inf, np.where(w > 0, np.inf, 0.0), phi)


def run_rowsu(train: ExpressionDataset, cfg: RowsuConfig, p_star: Optional[int] = None) -> RowsuResult:
    p = train.p
    p_star = cfg.final_total if p_star is None else p_star
    if p_star > p:
        raise ValueError(f"p* = {p_star} exceeds the number of genes p = {p}")

    bal_cfg = replace(cfg.balance, seed=derive_seed(cfg.seed, 0))
    balanced = balance(train, bal_cfg)

    iv = core_intervals(balanced)
    masks = gene_masks(balanced, iv)
    pos = pos_scores(balanced, iv, masks)
    cap = p_star if cfg.min_subset_cap is None else min(cfg.min_subset_cap, p_star)
    subset = greedy_min_subset(masks, pos, cap)
    gains = cover_gains(masks, subset)

    in_subset = np.zeros(p, dtype=bool)
    in_subset[subset] = True
    remaining = np.flatnonzero(~in_subset)
    n_rest = p_star - len(subset)

    psi = w = phi = np.zeros(0)
    tail = np.zeros(0, dtype=int)
    if n_rest > 0 and remaining.size:
        rest = balanced.take_genes(remaining)
        psi = rfish_values(class_summary(rest), balanced=True)
        model = train_linear_svm(
            rest,
            C=cfg.svm_C,
            tolerance=cfg.svm_tolerance,
            seed=derive_seed(cfg.seed, 1),
            scaling=cfg.svm_scaling,
        )
        w = model.w
        phi = weighted_score(psi, w)
        tail = descending_order(phi)[:n_rest]

    order = np.concatenate([np.asarray(subset, dtype=int), remaining[tail]])
    scores = np.concatenate([gains, phi[tail]])
    ranking = RankedGenes(order, scores, n_leading=len(subset))
    return RowsuResult(ranking, balanced, tuple(subset), remaining, psi, w, phi)


def rowsu_select(train: ExpressionDataset, cfg: RowsuConfig) -> RankedGenes:
    """Top ``cfg.final_total`` genes: minimum subset first, then by phi."""
    return run_rowsu(train, cfg).ranking


def rank_all(train: ExpressionDataset, cfg: RowsuConfig) -> RankedGenes:
    """Order every gene; truncating at p* reproduces :func:`rowsu_select`."""
    return run_rowsu(train, cfg, p_star=train.p).ranking
