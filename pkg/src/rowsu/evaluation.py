"""Repeated stratified hold-out evaluation of rankers x classifiers x p*.

Each repeat enforces the class ratio, splits 80/20, runs every ranker on the
training part only, fits each classifier on the top-p* genes and scores it
on the held-out part.  Randomness for repeat ``r`` is keyed by
``(seed, r)`` so repeats are independent of execution order.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Callable, Mapping, Optional

import numpy as np

from .baselines import fisher_rank, mrmr_rank, pos_rank, snr_rank, wilcoxon_rank
from .classifiers import forest_fit, knn_fit
from .dataset import POS, ExpressionDataset, SplitSpec, enforce_imbalance, stratified_split
from .pipeline import RowsuConfig, run_rowsu
from .ranking import RankedGenes
from .seeding import derive_seed

log = logging.getLogger(__name__)

RANKERS = ("rowsu", "fish", "wilc", "snr", "pos", "mrmr")
CLASSIFIERS = ("knn", "rf")
STABILITY_MEASURE = "mean_pairwise_jaccard"


@dataclass(frozen=True, eq=False)
class Selection:
    """A ranker's output plus the training rows its classifiers are fitted on."""

    ranking: RankedGenes
    fit_data: ExpressionDataset


@dataclass(frozen=True)
class EvalConfig:
    repeats: int = 500
    train_fraction: float = 0.8
    imbalance: Optional[tuple] = (4, 1)
    p_grid: tuple = (5, 10, 15, 20, 25, 30)
    rankers: tuple = RANKERS
    classifiers: tuple = CLASSIFIERS
    seed: int = 0
    knn_k: int = 5
    n_trees: int = 500
    rowsu: RowsuConfig = field(default_factory=RowsuConfig)
    # ROWSU classifiers are fitted on the balanced training data it built
    rowsu_fit_balanced: bool = True
    dataset_name: str = "data"

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if not self.p_grid:
            raise ValueError("p_grid is empty")
        if any(int(k) < 1 for k in self.p_grid):
            raise ValueError(f"p_grid entries must be >= 1, got {self.p_grid}")


@dataclass(frozen=True)
class RepeatRecord:
    dataset: str
    ranker: str
    classifier: str
    p_star: int
    repeat: int
    accuracy: float
    sensitivity: float
    error: str = ""


@dataclass(frozen=True)
class Aggregate:
    ranker: str
    classifier: str
    p_star: int
    n_accuracy: int
    accuracy_mean: float
    accuracy_sd: float
    n_sensitivity: int
    sensitivity_mean: float
    sensitivity_sd: float


@dataclass(frozen=True, eq=False)
class EvalReport:
    config: EvalConfig
    records: tuple
    aggregates: tuple
    # (ranker, repeat) -> gene indices, best first, length max(p_grid)
    selections: Mapping
    # repeat -> (train sample ids, test sample ids)
    splits: Mapping


# --------------------------------------------------------------------------
# Built-in rankers and classifiers
# --------------------------------------------------------------------------


def _rank_rowsu(train, n_select, seed, cfg: RowsuConfig, fit_balanced: bool):
    res = run_rowsu(train, replace(cfg, final_total=n_select, seed=seed))
    return Selection(res.ranking, res.balanced if fit_balanced else train)


def _rank_simple(train, n_select, seed, fn):
    return Selection(fn(train).truncate(n_select), train)


def _rank_mrmr(train, n_select, seed):
    return Selection(mrmr_rank(train, k=n_select).truncate(n_select), train)


def _fit_knn(fit: ExpressionDataset, seed, k):
    return knn_fit(fit.values, fit.labels, k=min(k, fit.n))


def _fit_rf(fit: ExpressionDataset, seed, n_trees):
    return forest_fit(fit.values, fit.labels, n_trees=n_trees, seed=seed)


def builtin_rankers(cfg: EvalConfig) -> dict:
    table = {
        "rowsu": partial(_rank_rowsu, cfg=cfg.rowsu, fit_balanced=cfg.rowsu_fit_balanced),
        "fish": partial(_rank_simple, fn=fisher_rank),
        "wilc": partial(_rank_simple, fn=wilcoxon_rank),
        "snr": partial(_rank_simple, fn=snr_rank),
        "pos": partial(_rank_simple, fn=pos_rank),
        "mrmr": _rank_mrmr,
    }
    unknown = set(cfg.rankers) - set(table)
    if unknown:
        raise ValueError(f"unknown ranker(s): {sorted(unknown)}; choose from {RANKERS}")
    return {name: table[name] for name in cfg.rankers}


def builtin_classifiers(cfg: EvalConfig) -> dict:
    table = {
        "knn": partial(_fit_knn, k=cfg.knn_k),
        "rf": partial(_fit_rf, n_trees=cfg.n_trees),
    }
    unknown = set(cfg.classifiers) - set(table)
    if unknown:
        raise ValueError(f"unknown classifier(s): {sorted(unknown)}; choose from {CLASSIFIERS}")
    return {name: table[name] for name in cfg.classifiers}


# --------------------------------------------------------------------------
# Metrics
# --------------------------------------------------------------------------


def accuracy_sensitivity(y_true, y_pred):
    """Accuracy and sensitivity (recall on pos); sensitivity is NaN when the
    test set has no positive sample."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    acc = float(np.mean(y_true == y_pred))
    pos = y_true == POS
    if not pos.any():
        return acc, math.nan
    return acc, float(np.sum(y_pred[pos] == POS) / pos.sum())


# --------------------------------------------------------------------------
# Protocol
# --------------------------------------------------------------------------


def _run_repeat(d: ExpressionDataset, cfg: EvalConfig, r: int, rankers, classifiers):
    seed_r = derive_seed(cfg.seed, r)
    data = d
    if cfg.imbalance is not None:
        data = enforce_imbalance(d, cfg.imbalance, seed=derive_seed(seed_r, 0))
    train, test = stratified_split(data, SplitSpec(cfg.train_fraction, derive_seed(seed_r, 1)))
    n_select = max(int(k) for k in cfg.p_grid)

    records, selections = [], {}
    for rname, ranker in rankers.items():
        sel = ranker(train, n_select, derive_seed(seed_r, 2))
        top = np.asarray(sel.ranking.top(n_select), dtype=int)
        selections[(rname, r)] = tuple(int(g) for g in top)
        for p_star in cfg.p_grid:
            genes = top[: int(p_star)]
            fit = sel.fit_data.take_genes(genes)
            X_test = test.values[:, genes]
            for cname, fit_clf in classifiers.items():
                try:
                    model = fit_clf(fit, derive_seed(seed_r, 3))
                    acc, sens = accuracy_sensitivity(test.labels, model.predict(X_test))
                    err = ""
                except Exception as exc:  # recorded, not fatal
                    log.warning("repeat %d %s/%s p*=%d failed: %s", r, rname, cname, p_star, exc)
                    acc, sens, err = math.nan, math.nan, f"{type(exc).__name__}: {exc}"
                records.append(
                    RepeatRecord(cfg.dataset_name, rname, cname, int(p_star), r, acc, sens, err)
                )
    return records, selections, (train.sample_ids, test.sample_ids)


def _mean_sd(values):
    v = np.asarray([x for x in values if not math.isnan(x)], dtype=float)
    if v.size == 0:
        return 0, math.nan, math.nan
    sd = float(v.std(ddof=1)) if v.size > 1 else math.nan
    return int(v.size), float(v.mean()), sd


def aggregate(records, cfg: EvalConfig) -> tuple:
    groups = {}
    for rec in records:
        groups.setdefault((rec.ranker, rec.classifier, rec.p_star), []).append(rec)
    out = []
    for rname, cname, p_star in itertools.product(cfg.rankers, cfg.classifiers, cfg.p_grid):
        recs = groups.get((rname, cname, int(p_star)), [])
        na, ma, sa = _mean_sd(r.accuracy for r in recs)
        ns, ms, ss = _mean_sd(r.sensitivity for r in recs)
        out.append(Aggregate(rname, cname, int(p_star), na, ma, sa, ns, ms, ss))
    return tuple(out)


def run_eval(
    d: ExpressionDataset,
    cfg: EvalConfig,
    rankers: Optional[Mapping[str, Callable]] = None,
    classifiers: Optional[Mapping[str, Callable]] = None,
    jobs: int = 1,
) -> EvalReport:
    """Run the repeated hold-out protocol.

    ``rankers`` maps a name to ``f(train, n_select, seed) -> Selection`` and
    ``classifiers`` maps a name to ``f(fit_data, seed) -> model`` with a
    ``predict(X)`` method.  When omitted they are built from ``cfg``.
    Custom callables must be picklable for ``jobs > 1``.
    """
    bad = [k for k in cfg.p_grid if int(k) > d.p]
    if bad:
        raise ValueError(f"p* grid entry {bad[0]} exceeds the number of genes p = {d.p}")
    if rankers is None:
        rankers = builtin_rankers(cfg)
    else:
        cfg = replace(cfg, rankers=tuple(rankers))
    if classifiers is None:
        classifiers = builtin_classifiers(cfg)
    else:
        cfg = replace(cfg, classifiers=tuple(classifiers))

    work = partial(_run_repeat, d, cfg, rankers=dict(rankers), classifiers=dict(classifiers))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, range(cfg.repeats)))
    else:
        results = [work(r) for r in range(cfg.repeats)]

    records, selections, splits = [], {}, {}
    for r, (recs, sels, split) in enumerate(results):
        records.extend(recs)
        selections.update(sels)
        splits[r] = split
    return EvalReport(cfg, tuple(records), aggregate(records, cfg), selections, splits)


# --------------------------------------------------------------------------
# Stability
# --------------------------------------------------------------------------


def jaccard(a, b) -> float:
    a, b = set(a), set(b)
    union = a | b
    return 1.0 if not union else len(a & b) / len(union)


def stability_matrix(report: EvalReport) -> dict:
    """(ranker, p*) -> mean pairwise Jaccard similarity of the top-p* sets
    across repeats (1.0 with a single repeat)."""
    cfg = report.config
    out = {}
    for rname in cfg.rankers:
        sels = [report.selections[(rname, r)] for r in range(cfg.repeats)]
        for p_star in cfg.p_grid:
            sets = [s[: int(p_star)] for s in sels]
            pairs = [jaccard(a, b) for a, b in itertools.combinations(sets, 2)]
            out[(rname, int(p_star))] = float(np.mean(pairs)) if pairs else 1.0
    return out


# --------------------------------------------------------------------------
# CSV output
# --------------------------------------------------------------------------


def _num(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else format(v, ".17g")
    return str(v)


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def write_raw_csv(report: EvalReport, path) -> None:
    _write(
        path,
        ["dataset", "ranker", "classifier", "p_star", "repeat", "accuracy", "sensitivity", "error"],
        (
            (r.dataset, r.ranker, r.classifier, r.p_star, r.repeat, r.accuracy, r.sensitivity, r.error)
            for r in report.records
        ),
    )


def write_aggregate_csv(report: EvalReport, path) -> None:
    name = report.config.dataset_name
    _write(
        path,
        [
            "dataset", "ranker", "classifier", "p_star",
            "n_accuracy", "accuracy_mean", "accuracy_sd",
            "n_sensitivity", "sensitivity_mean", "sensitivity_sd",
        ],
        (
            (name, a.ranker, a.classifier, a.p_star, a.n_accuracy, a.accuracy_mean,
             a.accuracy_sd, a.n_sensitivity, a.sensitivity_mean, a.sensitivity_sd)
            for a in report.aggregates
        ),
    )


def write_stability_csv(report: EvalReport, path) -> None:
    name = report.config.dataset_name
    stab = stability_matrix(report)
    _write(
        path,
        ["dataset", "ranker", "p_star", "measure", "stability"],
        ((name, rk, ps, STABILITY_MEASURE, v) for (rk, ps), v in stab.items()),
    )


def write_report(report: EvalReport, out_dir) -> list:
    """Write raw.csv, aggregate.csv and stability.csv; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "raw.csv", out / "aggregate.csv", out / "stability.csv"]
    write_raw_csv(report, paths[0])
    write_aggregate_csv(report, paths[1])
    write_stability_csv(report, paths[2])
    return paths
