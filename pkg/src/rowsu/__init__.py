"""Robust weighted-score feature selection for class-imbalanced, high-dimensional
binary data, with baseline rankers, classifiers and an evaluation harness."""

from .balance import BalanceConfig, balance
from .baselines import fisher_rank, mrmr_rank, pos_rank, snr_rank, wilcoxon_rank
from .dataset import (
    ExpressionDataset,
    DatasetError,
    SplitSpec,
    enforce_imbalance,
    load_csv,
    save_csv,
    stratified_split,
    synth_generate,
)
from .evaluation import EvalConfig, EvalReport, run_eval, stability_matrix, write_report
from .masks import core_intervals, gene_masks, greedy_min_subset, pos_scores
from .pipeline import RowsuConfig, rank_all, rowsu_select
from .ranking import RankedGenes
from .robust import class_summary, rfish_scores
from .svm import margin_distance, train_linear_svm

__version__ = "0.1.0"
