import numpy as np
import pytest

from rowsu.dataset import ExpressionDataset, synth_generate
from rowsu.masks import core_intervals, gene_masks, greedy_min_subset, pos_scores
from rowsu.balance import BalanceConfig, balance
from rowsu.pipeline import RowsuConfig, rank_all, rowsu_select, run_rowsu, weighted_score
from rowsu.seeding import derive_seed


def small(seed=0, n_neg=30, n_pos=10, p=40):
    d, _ = synth_generate(n_neg, n_pos, p, 5, 2.0, 0.0, seed=seed)
    return d


def test_phi_arithmetic():
    np.testing.assert_array_equal(weighted_score([2.0, 1.0], [0.5, -3.0]), [1.0, 3.0])


def test_phi_infinity_convention():
    np.testing.assert_array_equal(weighted_score([np.inf, np.inf, 0.0], [0.2, 0.0, 5.0]), [np.inf, 0.0, 0.0])


def test_phi_selects_larger_product():
    # two remaining genes, one slot: phi = (1, 3) picks the second
    phi = weighted_score([2.0, 1.0], [0.5, -3.0])
    assert int(np.argmax(phi)) == 1


def test_min_subset_leads_output():
    d = small()
    cfg = RowsuConfig(final_total=15)
    res = run_rowsu(d, cfg)
    bal = balance(d, BalanceConfig(seed=derive_seed(cfg.seed, 0)))
    iv = core_intervals(bal)
    masks = gene_masks(bal, iv)
    subset = greedy_min_subset(masks, pos_scores(bal, iv, masks), 15)
    assert list(res.min_subset) == subset
    assert res.ranking.order[: len(subset)].tolist() == subset
    assert res.ranking.n_leading == len(subset)


def test_p_star_equal_to_subset_size():
    d = small(1)
    k = len(run_rowsu(d, RowsuConfig(final_total=20)).min_subset)
    out = rowsu_select(d, RowsuConfig(final_total=k))
    assert out.order.tolist() == list(run_rowsu(d, RowsuConfig(final_total=k)).min_subset)
    assert len(out) == k


def test_tail_ordered_by_phi():
    d = small(2)
    res = run_rowsu(d, RowsuConfig(final_total=25))
    tail = res.ranking.order[res.ranking.n_leading:]
    phi_by_gene = dict(zip(res.remaining.tolist(), res.phi.tolist()))
    vals = [phi_by_gene[g] for g in tail]
    assert vals == sorted(vals, reverse=True)
    assert (res.phi >= 0).all()


def test_rank_all_is_permutation_and_prefix():
    d = small(3)
    cfg = RowsuConfig(final_total=12)
    full = rank_all(d, cfg)
    assert sorted(full.order.tolist()) == list(range(d.p))
    np.testing.assert_array_equal(full.order[:12], rowsu_select(d, cfg).order)


def test_prefix_stability():
    d = small(4)
    a = rowsu_select(d, RowsuConfig(final_total=8, min_subset_cap=3)).order
    b = rowsu_select(d, RowsuConfig(final_total=20, min_subset_cap=3)).order
    np.testing.assert_array_equal(b[:8], a)


def test_no_duplicates_and_length():
    d = small(5)
    for k in (1, 5, 17, d.p):
        out = rowsu_select(d, RowsuConfig(final_total=k))
        assert len(out) == k == len(set(out.order.tolist()))


def test_determinism():
    d = small(6)
    a = rowsu_select(d, RowsuConfig(final_total=20, seed=9))
    b = rowsu_select(d, RowsuConfig(final_total=20, seed=9))
    assert a.order.tobytes() == b.order.tobytes() and a.scores.tobytes() == b.scores.tobytes()


def test_errors():
    d = small()
    with pytest.raises(ValueError):
        rowsu_select(d, RowsuConfig(final_total=d.p + 1))
    with pytest.raises(ValueError):
        RowsuConfig(final_total=0)


def test_zero_phi_genes_rank_below_positive():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 6))
    y = np.array([0] * 20 + [1] * 10)
    X[:, 5] = 1.0
    d = ExpressionDataset.from_arrays(X, y)
    out = rank_all(d, RowsuConfig(final_total=6, min_subset_cap=0))
    assert out.order[-1] == 5


@pytest.mark.slow
def test_planted_recovery_median():
    hits = []
    for seed in range(50):
        d, planted = synth_generate(80, 20, 200, 10, 3.0, 0.0, seed=seed)
        top = rowsu_select(d, RowsuConfig(final_total=10, seed=seed)).order
        hits.append(len(set(top.tolist()) & set(planted)))
    assert np.median(hits) >= 7
