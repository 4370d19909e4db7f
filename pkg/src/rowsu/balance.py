"""Minority oversampling by averaging random minority sub-samples."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import POS, DatasetError, ExpressionDataset
from .seeding import rng_for


class AlreadyBalancedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BalanceConfig:
    """``subsample_size`` of None means ``max(2, ceil(n_pos / 2))``.

    ``with_replacement`` controls membership inside a single draw; separate
    draws are always independent.
    """

    subsample_size: Optional[int] = None
    seed: int = 0
    with_replacement: bool = False

    def resolve_size(self, n_pos: int) -> int:
        if self.subsample_size is None:
            return max(2, math.ceil(n_pos / 2))
        return int(self.subsample_size)


def balance(train: ExpressionDataset, cfg: BalanceConfig = BalanceConfig()) -> ExpressionDataset:
    """Append ``n_neg - n_pos`` synthetic positive rows to ``train``.

    Each synthetic row is the column mean of a random size-``n'`` subset of
    the positive rows.  The original rows are returned unchanged as a prefix,
    so the output has ``n_neg`` rows per class and ``2 * n_neg`` in total.
    """
    n_pos, n_neg = train.n_pos, train.n_neg
    if n_pos < 2:
        raise DatasetError(f"balancing needs at least 2 positive samples, got {n_pos}")
    if n_pos > n_neg:
        raise DatasetError(
            f"positive class is the majority (neg={n_neg}, pos={n_pos}); nothing to balance"
        )
    if n_pos == n_neg:
        warnings.warn("classes already balanced; returning input unchanged", AlreadyBalancedWarning)
        return train
    size = cfg.resolve_size(n_pos)
    if size < 2 or (size > n_pos and not cfg.with_replacement):
        raise DatasetError(f"sub-sample size must lie in [2, n_pos={n_pos}], got {size}")

    m = n_neg - n_pos
    minority = train.class_values(POS)
    rng = rng_for(cfg.seed)
    if cfg.with_replacement:
        draws = rng.integers(0, n_pos, size=(m, size))
    else:
        draws = np.stack([rng.choice(n_pos, size=size, replace=False) for _ in range(m)])
    synthetic = minority[draws].mean(axis=1)

    return ExpressionDataset(
        np.vstack([train.values, synthetic]),
        np.concatenate([train.labels, np.full(m, POS, dtype=np.int8)]),
        train.gene_names,
        train.sample_ids + tuple(f"synthetic{s}" for s in range(m)),
    )
