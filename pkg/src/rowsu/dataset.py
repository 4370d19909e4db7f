"""Dataset container, CSV ingestion, splitting and the synthetic generator."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .seeding import rng_for

NEG = 0
POS = 1


class DatasetError(ValueError):
    """Raised for malformed input files or unusable datasets."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ExpressionDataset:
    """Samples x genes expression matrix with a binary label per sample.

    ``labels`` holds 1 for the positive (minority, disease) class and 0 for
    the negative class.  Arrays are copied and made read-only on construction.
    """

    values: np.ndarray
    labels: np.ndarray
    gene_names: tuple = ()
    sample_ids: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DatasetError(f"values must be 2-D, got shape {values.shape}")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != values.shape[0]:
            raise DatasetError(
                f"{labels.shape[0] if labels.ndim == 1 else labels.shape} labels "
                f"for {values.shape[0]} rows"
            )
        if labels.size and not np.isin(labels, (NEG, POS)).all():
            raise DatasetError("labels must be 0 (neg) or 1 (pos)")
        if not np.isfinite(values).all():
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise DatasetError(f"non-finite value at row {r}, column {c}")
        n, p = values.shape
        genes = tuple(self.gene_names) or tuple(f"g{j}" for j in range(p))
        ids = tuple(self.sample_ids) or tuple(f"s{i}" for i in range(n))
        if len(genes) != p:
            raise DatasetError(f"{len(genes)} gene names for {p} columns")
        if len(ids) != n:
            raise DatasetError(f"{len(ids)} sample ids for {n} rows")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int8)))
        object.__setattr__(self, "gene_names", genes)
        object.__setattr__(self, "sample_ids", ids)

    @classmethod
    def from_arrays(cls, values, labels, gene_names=(), sample_ids=()):
        return cls(np.asarray(values, dtype=float), np.asarray(labels), gene_names, sample_ids)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def n_pos(self) -> int:
        return int(self.labels.sum())

    @property
    def n_neg(self) -> int:
        return self.n - self.n_pos

    @property
    def pos_mask(self) -> np.ndarray:
        return self.labels == POS

    def class_values(self, cls: int) -> np.ndarray:
        return self.values[self.labels == cls]

    def take_rows(self, rows) -> "ExpressionDataset":
        rows = np.asarray(rows, dtype=int)
        return ExpressionDataset(
            self.values[rows],
            self.labels[rows],
            self.gene_names,
            tuple(self.sample_ids[i] for i in rows),
        )

    def take_genes(self, cols) -> "ExpressionDataset":
        cols = np.asarray(cols, dtype=int)
        return ExpressionDataset(
            self.values[:, cols],
            self.labels,
            tuple(self.gene_names[j] for j in cols),
            self.sample_ids,
        )

    def require_both_classes(self, min_per_class: int = 1) -> None:
        if self.n_pos < min_per_class or self.n_neg < min_per_class:
            raise DatasetError(
                f"need at least {min_per_class} samples per class, "
                f"got neg={self.n_neg}, pos={self.n_pos}"
            )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    imbalance_ratio: Optional[tuple] = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.imbalance_ratio is not None:
            _check_ratio(self.imbalance_ratio)


def _check_ratio(ratio) -> tuple:
    maj, mino = (int(v) for v in ratio)
    if not maj >= mino >= 1:
        raise ValueError(f"imbalance ratio must satisfy maj >= min >= 1, got {maj}:{mino}")
    return maj, mino


def parse_ratio(text: str) -> tuple:
    """Parse ``"4:1"`` into ``(4, 1)``."""
    try:
        maj, mino = text.split(":")
        return _check_ratio((int(maj), int(mino)))
    except ValueError as exc:
        raise ValueError(f"bad ratio {text!r}: expected MAJ:MIN, e.g. 4:1") from exc


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def load_csv(
    path,
    label_column: str = "class",
    positive_label: str = "pos",
    id_column: Optional[str] = None,
) -> ExpressionDataset:
    """Read a header-first CSV with one column per gene and one label column.

    Rows whose label equals ``positive_label`` become the positive class;
    every other row is negative.  Errors name the offending row (1-based,
    counting the header as row 1) and column.
    """
    if not os.path.isfile(path):
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DatasetError(f"{path}: label column {label_column!r} not in header")
        if id_column is not None and id_column not in header:
            raise DatasetError(f"{path}: id column {id_column!r} not in header")
        label_idx = header.index(label_column)
        id_idx = header.index(id_column) if id_column is not None else None
        gene_cols = [k for k in range(len(header)) if k not in (label_idx, id_idx)]
        genes = [header[k] for k in gene_cols]
        seen = {}
        for k, g in zip(gene_cols, genes):
            if g in seen:
                raise DatasetError(
                    f"{path}: duplicate gene name {g!r} in columns {seen[g] + 1} and {k + 1}"
                )
            seen[g] = k

        rows, tags, ids = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DatasetError(
                    f"{path}: row {lineno} has {len(rec)} fields, header has {len(header)}"
                )
            vals = []
            for k in gene_cols:
                cell = rec[k].strip()
                if cell == "":
                    raise DatasetError(f"{path}: blank cell at row {lineno}, column {header[k]!r}")
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric cell {cell!r} at row {lineno}, column {header[k]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DatasetError(
                        f"{path}: non-finite cell {cell!r} at row {lineno}, column {header[k]!r}"
                    )
                vals.append(v)
            rows.append(vals)
            tags.append(rec[label_idx].strip())
            ids.append(rec[id_idx].strip() if id_idx is not None else f"s{len(ids)}")

    distinct = sorted(set(tags))
    if len(distinct) < 2:
        raise DatasetError(f"{path}: label column {label_column!r} has fewer than two classes")
    if len(distinct) > 2:
        raise DatasetError(
            f"{path}: label column {label_column!r} has {len(distinct)} classes {distinct}; "
            "exactly two are required"
        )
    if positive_label not in distinct:
        raise DatasetError(
            f"{path}: positive label {positive_label!r} not among labels {distinct}"
        )
    values = np.array(rows, dtype=float).reshape(len(rows), len(genes))
    labels = np.array([POS if t == positive_label else NEG for t in tags], dtype=np.int8)
    return ExpressionDataset(values, labels, tuple(genes), tuple(ids))


def save_csv(
    d: ExpressionDataset,
    path,
    label_column: str = "class",
    pos_label: str = "pos",
    neg_label: str = "neg",
    id_column: Optional[str] = None,
) -> None:
    """Write ``d`` so that :func:`load_csv` reads it back bit-exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ([id_column] if id_column else []) + list(d.gene_names) + [label_column]
        w.writerow(head)
        for i in range(d.n):
            row = [format(float(v), ".17g") for v in d.values[i]]
            tag = pos_label if d.labels[i] == POS else neg_label
            w.writerow(([d.sample_ids[i]] if id_column else []) + row + [tag])


# --------------------------------------------------------------------------
# Resampling
# --------------------------------------------------------------------------


def enforce_imbalance(d: ExpressionDataset, ratio=(4, 1), seed: int = 0) -> ExpressionDataset:
    """Drop random positive rows until neg:pos matches ``ratio``.

    The target positive count is ``floor(n_neg / maj * min)``.  Only positive
    rows are ever removed; if that would require adding positives (or the
    positive class is not the minority) a :class:`DatasetError` is raised.
    """
    maj, mino = _check_ratio(ratio)
    d.require_both_classes()
    n_neg, n_pos = d.n_neg, d.n_pos
    if n_pos > n_neg:
        raise DatasetError(f"positive class is not the minority (neg={n_neg}, pos={n_pos})")
    target = (n_neg * mino) // maj
    if target > n_pos:
        raise DatasetError(
            f"ratio {maj}:{mino} needs {target} positives but only {n_pos} exist; "
            "reaching it would require discarding negative rows"
        )
    if target < 1:
        raise DatasetError(f"ratio {maj}:{mino} leaves no positive rows (neg={n_neg})")
    if target == n_pos:
        return d
    rng = rng_for(seed)
    pos_rows = np.flatnonzero(d.pos_mask)
    keep_pos = rng.choice(pos_rows, size=target, replace=False)
    keep = np.sort(np.concatenate([np.flatnonzero(~d.pos_mask), keep_pos]))
    return d.take_rows(keep)


def stratified_split(d: ExpressionDataset, spec: SplitSpec):
    """Per-class random split; train gets ``floor(fraction * n_c)`` of each class.

    Rows keep their original relative order inside each partition.
    """
    if spec.imbalance_ratio is not None:
        d = enforce_imbalance(d, spec.imbalance_ratio, seed=spec.seed)
    rng = rng_for(spec.seed, 1)
    train_rows, test_rows = [], []
    for cls in (NEG, POS):
        rows = np.flatnonzero(d.labels == cls)
        if rows.size < 2:
            name = "pos" if cls == POS else "neg"
            raise DatasetError(f"class {name} has {rows.size} sample(s); at least 2 required")
        n_train = int(math.floor(spec.train_fraction * rows.size))
        perm = rng.permutation(rows)
        train_rows.append(perm[:n_train])
        test_rows.append(perm[n_train:])
    train = d.take_rows(np.sort(np.concatenate(train_rows)))
    test = d.take_rows(np.sort(np.concatenate(test_rows)))
    return train, test


# --------------------------------------------------------------------------
# Synthetic data
# --------------------------------------------------------------------------

OUTLIER_MIN = 50.0
OUTLIER_MAX = 100.0


def synth_generate(
    n_neg: int,
    n_pos: int,
    p: int,
    n_informative: int,
    shift: float,
    outlier_rate: float = 0.0,
    seed: int = 0,
):
    """Location-shift data with optional gross outliers.

    Every cell starts as N(0, 1).  For each planted gene the positive class
    is moved by ``shift`` (random sign per gene).  Afterwards each cell is,
    with probability ``outlier_rate``, replaced by a value of random sign and
    magnitude uniform in [50, 100].

    Returns ``(dataset, planted)`` where ``planted`` is a sorted tuple of
    gene indices.
    """
    if min(n_neg, n_pos, p) < 1:
        raise ValueError("n_neg, n_pos and p must be positive")
    if not 0 <= n_informative <= p:
        raise ValueError(f"n_informative must lie in [0, p={p}], got {n_informative}")
    if shift < 0:
        raise ValueError(f"shift must be >= 0, got {shift}")
    if not 0.0 <= outlier_rate < 1.0:
        raise ValueError(f"outlier_rate must lie in [0, 1), got {outlier_rate}")

    rng = rng_for(seed)
    n = n_neg + n_pos
    labels = np.zeros(n, dtype=np.int8)
    labels[rng.permutation(n)[:n_pos]] = POS
    values = rng.standard_normal((n, p))
    planted = np.sort(rng.choice(p, size=n_informative, replace=False))
    signs = rng.choice([-1.0, 1.0], size=n_informative)
    values[np.ix_(labels == POS, planted)] += shift * signs

    if outlier_rate > 0:
        hit = rng.random((n, p)) < outlier_rate
        mag = rng.uniform(OUTLIER_MIN, OUTLIER_MAX, size=(n, p))
        sgn = rng.choice([-1.0, 1.0], size=(n, p))
        values = np.where(hit, mag * sgn, values)

    width = len(str(p - 1))
    genes = tuple(f"gene{j:0{width}d}" for j in range(p))
    ids = tuple(f"sample{i}" for i in range(n))
    return ExpressionDataset(values, labels, genes, ids), tuple(int(j) for j in planted)
