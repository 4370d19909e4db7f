"""Command-line interface: ``rowsu select | evaluate | synth``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .balance import BalanceConfig
from .baselines import fisher_rank, mrmr_rank, pos_rank, snr_rank, wilcoxon_rank
from .dataset import DatasetError, SplitSpec, load_csv, parse_ratio, save_csv, stratified_split, synth_generate
from .evaluation import CLASSIFIERS, RANKERS, EvalConfig, run_eval, write_report
from .pipeline import RowsuConfig, rowsu_select

log = logging.getLogger("rowsu")


def _csv_list(choices):
    def parse(text):
        items = [t.strip().lower() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(
                f"invalid choice(s) {bad or text!r}; choose from {', '.join(choices)}"
            )
        return tuple(items)

    return parse


def _int_list(text):
    try:
        items = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return items


def _ratio(text):
    try:
        return parse_ratio(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_input(p):
    p.add_argument("--input", required=True, help="CSV with one column per gene and a label column")
    p.add_argument("--label-column", default="class")
    p.add_argument("--positive", default="pos", help="label value of the positive (minority) class")
    p.add_argument("--id-column", default=None, help="optional sample-id column")


def _add_rowsu(p):
    p.add_argument("--subsample-size", type=int, default=None, help="n' for minority averaging")
    p.add_argument("--min-subset-cap", type=int, default=None)
    p.add_argument("--svm-c", type=float, default=1.0)
    p.add_argument("--svm-scaling", choices=("robust", "zscore"), default="robust")


def _rowsu_config(args, p_star):
    return RowsuConfig(
        final_total=p_star,
        min_subset_cap=args.min_subset_cap,
        balance=BalanceConfig(subsample_size=args.subsample_size),
        svm_C=args.svm_c,
        svm_scaling=args.svm_scaling,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rowsu", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="rank genes and write the top p*")
    _add_input(sel)
    sel.add_argument("--method", type=str.lower, choices=RANKERS, default="rowsu")
    sel.add_argument("--p-star", type=int, default=20)
    sel.add_argument("--train-fraction", type=float, default=None,
                     help="rank on a stratified training split of this size instead of all rows")
    sel.add_argument("--seed", type=int, default=0)
    sel.add_argument("--out", required=True)
    _add_rowsu(sel)

    ev = sub.add_parser("evaluate", help="repeated hold-out evaluation")
    _add_input(ev)
    ev.add_argument("--repeats", type=int, default=500)
    ev.add_argument("--train-fraction", type=float, default=0.8)
    ev.add_argument("--ratio", type=_ratio, default=(4, 1), help="neg:pos ratio to enforce, e.g. 4:1")
    ev.add_argument("--no-ratio", action="store_true", help="keep the input class ratio")
    ev.add_argument("--p-grid", type=_int_list, default=(5, 10, 15, 20, 25, 30))
    ev.add_argument("--methods", type=_csv_list(RANKERS), default=RANKERS)
    ev.add_argument("--classifiers", type=_csv_list(CLASSIFIERS), default=CLASSIFIERS)
    ev.add_argument("--knn-k", type=int, default=5)
    ev.add_argument("--trees", type=int, default=500)
    ev.add_argument("--jobs", type=int, default=1)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--dataset-name", default=None)
    ev.add_argument("--out-dir", required=True)
    _add_rowsu(ev)

    sy = sub.add_parser("synth", help="write a synthetic dataset and its planted genes")
    sy.add_argument("--n-neg", type=int, default=80)
    sy.add_argument("--n-pos", type=int, default=20)
    sy.add_argument("--p", type=int, default=500)
    sy.add_argument("--informative", type=int, default=20)
    sy.add_argument("--shift", type=float, default=3.0)
    sy.add_argument("--outlier-rate", type=float, default=0.0)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--out", default="synthetic.csv")
    sy.add_argument("--planted-out", default=None, help="default: <out stem>_planted.txt")
    return parser


def _load(args):
    return load_csv(args.input, args.label_column, args.positive, args.id_column)


def cmd_select(args) -> int:
    d = _load(args)
    if not 1 <= args.p_star <= d.p:
        raise DatasetError(f"--p-star {args.p_star} must lie in [1, p={d.p}]")
    if args.train_fraction is not None:
        d, _ = stratified_split(d, SplitSpec(args.train_fraction, args.seed))
    method = args.method
    if method == "rowsu":
        ranking = rowsu_select(d, _rowsu_config(args, args.p_star))
    elif method == "mrmr":
        ranking = mrmr_rank(d, k=args.p_star)
    else:
        fn = {"fish": fisher_rank, "wilc": wilcoxon_rank, "snr": snr_rank, "pos": pos_rank}[method]
        ranking = fn(d)
    ranking = ranking.truncate(args.p_star)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "gene_name", "score"])
        for k, (g, s) in enumerate(zip(ranking.order, ranking.scores), start=1):
            w.writerow([k, d.gene_names[g], format(float(s), ".17g")])
    log.info("wrote %d genes to %s", len(ranking), args.out)
    return 0


def cmd_evaluate(args) -> int:
    d = _load(args)
    bad = [k for k in args.p_grid if k > d.p or k < 1]
    if bad:
        raise DatasetError(f"--p-grid entry {bad[0]} is outside [1, p={d.p}]")
    cfg = EvalConfig(
        repeats=args.repeats,
        train_fraction=args.train_fraction,
        imbalance=None if args.no_ratio else args.ratio,
        p_grid=args.p_grid,
        rankers=args.methods,
        classifiers=args.classifiers,
        seed=args.seed,
        knn_k=args.knn_k,
        n_trees=args.trees,
        rowsu=_rowsu_config(args, max(args.p_grid)),
        dataset_name=args.dataset_name or Path(args.input).stem,
    )
    report = run_eval(d, cfg, jobs=args.jobs)
    for path in write_report(report, args.out_dir):
        log.info("wrote %s", path)
    return 0


def cmd_synth(args) -> int:
    d, planted = synth_generate(
        args.n_neg, args.n_pos, args.p, args.informative, args.shift, args.outlier_rate, args.seed
    )
    save_csv(d, args.out)
    out = Path(args.out)
    planted_path = args.planted_out or str(out.with_name(out.stem + "_planted.txt"))
    with open(planted_path, "w", encoding="utf-8") as fh:
        for j in planted:
            fh.write(d.gene_names[j] + "\n")
    log.info("wrote %s and %s", args.out, planted_path)
    return 0


COMMANDS = {"select": cmd_select, "evaluate": cmd_evaluate, "synth": cmd_synth}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (DatasetError, ValueError, OSError) as exc:
        print(f"rowsu {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
