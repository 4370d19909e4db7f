import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rowsu.dataset import NEG, POS, ExpressionDataset
from rowsu.masks import core_intervals, cover_gains, gene_masks, greedy_min_subset, pos_scores


def two_class(neg, pos):
    """One-gene dataset from per-class value lists (negatives first)."""
    values = np.array(list(neg) + list(pos), dtype=float)[:, None]
    labels = [0] * len(neg) + [1] * len(pos)
    return ExpressionDataset.from_arrays(values, labels)


def bits(s):
    return np.array([c == "1" for c in s])


def hand_quartiles(x):
    # type-7: position 1 + (n - 1) q in the sorted sample
    xs = sorted(x)
    out = []
    for q in (0.25, 0.75):
        h = (len(xs) - 1) * q
        lo = int(np.floor(h))
        hi = min(lo + 1, len(xs) - 1)
        out.append(xs[lo] + (h - lo) * (xs[hi] - xs[lo]))
    return out


class TestCoreIntervals:
    def test_clamped_examples(self):
        iv = core_intervals(two_class([1, 2, 3, 4, 5], [4, 5, 6, 7, 8]))
        assert (iv.low[NEG, 0], iv.high[NEG, 0]) == (1, 5)
        assert (iv.low[POS, 0], iv.high[POS, 0]) == (4, 8)

    def test_constant_class(self):
        iv = core_intervals(two_class([2.5] * 4, [1, 2, 3]))
        assert (iv.low[NEG, 0], iv.high[NEG, 0]) == (2.5, 2.5)

    def test_whiskers_inside_support(self):
        # an outlier pushes the max past the upper whisker
        neg = [1, 2, 3, 4, 100]
        iv = core_intervals(two_class(neg, [0, 1, 2]))
        q1, q3 = hand_quartiles(neg)
        assert iv.high[NEG, 0] == q3 + 1.5 * (q3 - q1)
        assert iv.low[NEG, 0] == 1

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=15),
           st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=15))
    def test_matches_hand_rule(self, neg, pos):
        iv = core_intervals(two_class(neg, pos))
        for c, x in ((NEG, neg), (POS, pos)):
            q1, q3 = hand_quartiles(x)
            iqr = q3 - q1
            assert iv.low[c, 0] == pytest.approx(max(q1 - 1.5 * iqr, min(x)), abs=1e-9)
            assert iv.high[c, 0] == pytest.approx(min(q3 + 1.5 * iqr, max(x)), abs=1e-9)
            assert iv.low[c, 0] <= iv.high[c, 0]


class TestMasks:
    def test_overlapping_example(self):
        d = two_class([1, 2, 3, 4, 5], [4, 5, 6, 7, 8])
        m = gene_masks(d, core_intervals(d))
        np.testing.assert_array_equal(m[0], [1, 1, 1, 0, 0, 0, 0, 1, 1, 1])

    def test_disjoint_all_ones(self):
        d = two_class([1, 2, 3], [10, 11, 12])
        assert gene_masks(d, core_intervals(d)).all()

    def test_identical_all_zero(self):
        d = two_class([1, 2, 3, 4], [1, 2, 3, 4])
        assert not gene_masks(d, core_intervals(d)).any()

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.01, 100), st.floats(-50, 50))
    def test_increasing_affine_invariance(self, seed, a, b):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(20, 3))
        labels = np.array([0] * 12 + [1] * 8)
        d = ExpressionDataset.from_arrays(X, labels)
        t = ExpressionDataset.from_arrays(a * X + b, labels)
        m_d = gene_masks(d, core_intervals(d))
        m_t = gene_masks(t, core_intervals(t))
        # boundary samples may flip only through rounding in a*x+b
        assert (m_d != m_t).sum() <= 1

    def test_exact_affine_invariance(self):
        rng = np.random.default_rng(0)
        X = rng.integers(-20, 20, size=(25, 6)).astype(float)
        labels = np.array([0] * 15 + [1] * 10)
        d = ExpressionDataset.from_arrays(X, labels)
        t = ExpressionDataset.from_arrays(4.0 * X + 8.0, labels)
        np.testing.assert_array_equal(gene_masks(d, core_intervals(d)), gene_masks(t, core_intervals(t)))


class TestPosScores:
    def test_hand_overlap(self):
        d = two_class([1, 2, 3, 4, 5], [4, 5, 6, 7, 8])
        s = pos_scores(d, core_intervals(d))
        assert s.values[0] == pytest.approx(0.4)

    def test_disjoint_zero(self):
        d = two_class([1, 2, 3], [10, 11, 12])
        assert pos_scores(d, core_intervals(d)).values[0] == 0.0

    def test_constant_identical_one(self):
        d = two_class([3.0] * 4, [3.0] * 4)
        assert pos_scores(d, core_intervals(d)).values[0] == 1.0

    def test_dominant_class(self):
        d = two_class([1, 2, 3, 4, 5], [4, 5, 6, 7, 8, 9, 10])
        assert pos_scores(d, core_intervals(d)).dominant_class[0] == POS
        # equal counts, equal widths: neg
        d = two_class([1, 2, 3], [10, 11, 12])
        assert pos_scores(d, core_intervals(d)).dominant_class[0] == NEG


def brute_min_cover(masks):
    """Smallest number of genes covering every coverable sample."""
    target = masks.any(axis=0)
    if not target.any():
        return 0
    g = masks.shape[0]
    for size in range(1, g + 1):
        for combo in itertools.combinations(range(g), size):
            if (masks[list(combo)].any(axis=0) == target).all():
                return size
    raise AssertionError("unreachable")


def reference_greedy(masks, pos):
    """Straight reimplementation of the documented rule on Python ints."""
    rows = [int("".join("1" if b else "0" for b in m), 2) if len(m) else 0 for m in masks]
    chosen = []
    while True:
        best = None
        for j, r in enumerate(rows):
            key = (-bin(r).count("1"), pos[j], j)
            if best is None or key < best[0]:
                best = (key, j)
        if best is None or best[0][0] == 0:
            return chosen
        j = best[1]
        chosen.append(j)
        sel = rows[j]
        rows = [r & ~sel for r in rows]


class TestGreedy:
    def test_worked_example(self):
        masks = np.array([bits("11100000"), bits("00011100"), bits("11111000")])
        assert greedy_min_subset(masks, np.zeros(3)) == [2, 1]

    def test_single_full_cover(self):
        masks = np.array([bits("0110"), bits("1111"), bits("1000")])
        assert greedy_min_subset(masks, np.zeros(3)) == [1]

    def test_pos_tie_break(self):
        masks = np.array([bits("1100"), bits("1100")])
        assert greedy_min_subset(masks, np.array([0.3, 0.1])) == [1]

    def test_index_tie_break(self):
        masks = np.array([bits("1100"), bits("0011")])
        assert greedy_min_subset(masks, np.array([0.2, 0.2])) == [0, 1]

    def test_cap(self):
        masks = np.eye(4, dtype=bool)
        assert greedy_min_subset(masks, np.zeros(4), max_genes=2) == [0, 1]

    def test_empty(self):
        with pytest.raises(ValueError):
            greedy_min_subset(np.zeros((0, 5), dtype=bool), np.zeros(0))

    def test_cover_gains(self):
        masks = np.array([bits("11100000"), bits("00011100"), bits("11111000")])
        np.testing.assert_array_equal(cover_gains(masks, [2, 1]), [5, 1])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 12), st.floats(0.1, 0.6), st.integers(0, 10**6))
    def test_matches_reference_and_covers(self, g, n, density, seed):
        rng = np.random.default_rng(seed)
        masks = rng.random((g, n)) < density
        pos = rng.choice([0.0, 0.25, 0.5], size=g)
        got = greedy_min_subset(masks, pos)
        assert got == reference_greedy(masks, pos)
        assert (masks[got].any(axis=0) == masks.any(axis=0)).all() if got else not masks.any()
        assert len(set(got)) == len(got)
        assert len(got) >= brute_min_cover(masks)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        masks = rng.random((10, 10)) < 0.3
        pos = rng.random(10)
        assert greedy_min_subset(masks, pos) == greedy_min_subset(masks, pos)
