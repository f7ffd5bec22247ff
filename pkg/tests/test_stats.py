"""Statistics suite: oracle agreement, worked examples, and invariants.

Ranking metrics are checked against brute-force pair enumeration and a
rank-walk AP. The Wilcoxon exact path is checked against full 2^n sign
enumeration for small n, which validates the doubled-rank subset-sum DP
including tied ranks. The paired t worked example reproduces the classic
sleep-study dataset values printed by R's t.test.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

import oracles
from ruqeval.errors import DegenerateInputError, InputError, UndefinedMetricError
from ruqeval.stats import (
    BOOTSTRAP_STATISTICS,
    CiResult,
    ScoreMatrix,
    auroc,
    average_precision,
    bootstrap_ci,
    confusion_metrics,
    macro_micro,
    paired_t_test,
    pearson,
    wilcoxon_signed_rank,
)

# R's built-in sleep dataset, extra hours of sleep under two drugs
SLEEP_GROUP_1 = [0.7, -1.6, -0.2, -1.2, -0.1, 3.4, 3.7, 0.8, 0.0, 2.0]
SLEEP_GROUP_2 = [1.9, 0.8, 1.1, 0.1, -0.1, 4.4, 5.5, 1.6, 4.6, 3.4]


# ---------------------------------------------------------------------------
# AUROC


class TestAuroc:
    def test_perfect_separation(self):
        assert auroc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_perfectly_wrong(self):
        assert auroc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0

    def test_all_tied_is_half(self):
        assert auroc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5

    def test_hand_value(self):
        # pairs: (0.8,0.3)+1 (0.8,0.6)+1 (0.4,0.3)+1 (0.4,0.6)+0 -> 3/4
        assert auroc([0.8, 0.4, 0.6, 0.3], [1, 1, 0, 0]) == pytest.approx(0.75)

    def test_oracle_agreement_500_instances(self):
        rng = np.random.default_rng(42)
        for _ in range(500):
            n = int(rng.integers(2, 40))
            scores = rng.integers(0, 10, size=n) / 10.0  # force ties
            truth = rng.integers(0, 2, size=n)
            if truth.sum() in (0, n):
                truth[0] = 1 - truth[0]
            expected = oracles.auroc_pair_enumeration(scores.tolist(), truth.tolist())
            assert auroc(scores, truth) == pytest.approx(expected, abs=1e-12)

    def test_single_class_raises(self):
        with pytest.raises(UndefinedMetricError):
            auroc([0.1, 0.9], [1, 1])
        with pytest.raises(UndefinedMetricError):
            auroc([0.1, 0.9], [0, 0])

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            auroc([0.1, 0.9], [1])

    def test_nonbinary_truth(self):
        with pytest.raises(InputError):
            auroc([0.1, 0.9], [1, 2])

    @given(st.lists(st.integers(0, 1), min_size=4, max_size=30), st.randoms())
    @settings(deadline=None, max_examples=60)
    def test_complement_symmetry_without_ties(self, truth, rnd):
        if sum(truth) in (0, len(truth)):
            truth[0] = 1 - truth[0]
        grid = list(np.linspace(0.01, 0.99, len(truth)))
        rnd.shuffle(grid)
        scores = np.array(grid)
        t = np.array(truth)
        assert auroc(scores, t) + auroc(1.0 - scores, t) == pytest.approx(1.0, abs=1e-12)

    @given(st.lists(st.integers(0, 1), min_size=4, max_size=30), st.randoms())
    @settings(deadline=None, max_examples=60)
    def test_monotone_transform_invariance(self, truth, rnd):
        if sum(truth) in (0, len(truth)):
            truth[0] = 1 - truth[0]
        scores = np.array([rnd.choice([0.1, 0.2, 0.5, 0.7, 0.9]) for _ in truth])
        t = np.array(truth)
        assert auroc(scores**3, t) == pytest.approx(auroc(scores, t), abs=1e-12)


# ---------------------------------------------------------------------------
# Average precision


class TestAveragePrecision:
    def test_perfect_ranking(self):
        assert average_precision([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_hand_value(self):
        # positives at ranks 1 and 3: (1/1 + 2/3) / 2
        got = average_precision([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0])
        assert got == pytest.approx(5.0 / 6.0, abs=1e-15)

    def test_tie_break_is_index_order(self):
        # equal scores: truth index 0 is walked first, giving the high AP
        assert average_precision([0.5, 0.5], [1, 0]) == 1.0
        assert average_precision([0.5, 0.5], [0, 1]) == 0.5

    def test_oracle_agreement(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(1, 30))
            scores = rng.integers(0, 8, size=n) / 8.0
            truth = rng.integers(0, 2, size=n)
            if truth.sum() == 0:
                truth[int(rng.integers(0, n))] = 1
            expected = oracles.average_precision_rank_walk(
                scores.tolist(), truth.tolist()
            )
            assert average_precision(scores, truth) == pytest.approx(
                expected, abs=1e-12
            )

    def test_no_positives_raises(self):
        with pytest.raises(UndefinedMetricError):
            average_precision([0.4, 0.6], [0, 0])

    def test_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            scores = rng.random(12)
            truth = rng.integers(0, 2, size=12)
            truth[0] = 1
            ap = average_precision(scores, truth)
            assert 0.0 < ap <= 1.0


# ---------------------------------------------------------------------------
# Confusion metrics


class TestConfusionMetrics:
    def test_hand_counts(self):
        scores = [0.9, 0.7, 0.4, 0.2, 0.8, 0.1]
        truth = [1, 1, 1, 0, 0, 0]
        m = confusion_metrics(scores, truth, 0.5)
        assert m["counts"] == {"tp": 2, "fp": 1, "fn": 1, "tn": 2}
        assert m["sensitivity"] == pytest.approx(2 / 3)
        assert m["specificity"] == pytest.approx(2 / 3)
        assert m["ppv"] == pytest.approx(2 / 3)
        assert m["npv"] == pytest.approx(2 / 3)
        assert m["f1"] == pytest.approx(4 / 6)

    def test_threshold_is_inclusive(self):
        m = confusion_metrics([0.5], [1], 0.5)
        assert m["counts"]["tp"] == 1
        assert m["sensitivity"] == 1.0

    def test_zero_over_zero_is_none_not_nan(self):
        # nothing predicted positive and no actual positives
        m = confusion_metrics([0.2, 0.3], [0, 0], 0.9)
        assert m["sensitivity"] is None
        assert m["ppv"] is None
        assert m["f1"] is None
        assert m["specificity"] == 1.0
        assert m["npv"] == 1.0

    def test_precision_recall_aliases(self):
        m = confusion_metrics([0.9, 0.1], [1, 0], 0.5)
        assert m["precision"] == m["ppv"]
        assert m["recall"] == m["sensitivity"]

    def test_threshold_out_of_range(self):
        with pytest.raises(InputError):
            confusion_metrics([0.5], [1], 1.5)

    def test_cross_check_against_sklearn_style_formulas(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = 30
            scores = rng.random(n)
            truth = rng.integers(0, 2, size=n)
            thr = float(rng.random())
            m = confusion_metrics(scores, truth, thr)
            pred = scores >= thr
            tp = int(np.sum(pred & (truth == 1)))
            fp = int(np.sum(pred & (truth == 0)))
            fn = int(np.sum(~pred & (truth == 1)))
            if tp + fp:
                assert m["ppv"] == pytest.approx(tp / (tp + fp))
            if 2 * tp + fp + fn:
                assert m["f1"] == pytest.approx(2 * tp / (2 * tp + fp + fn))


# ---------------------------------------------------------------------------
# ScoreMatrix and macro/micro aggregation


def make_matrix():
    scores = np.array(
        [
            [0.9, 0.1, 0.6],
            [0.8, 0.2, 0.4],
            [0.7, 0.3, 0.5],
            [0.3, 0.7, 0.2],
            [0.2, 0.8, 0.9],
            [0.1, 0.9, 0.3],
        ]
    )
    truth = np.array(
        [
            [1, 1, 0],
            [1, 1, 0],
            [1, 1, 0],
            [0, 0, 0],
            [0, 0, 0],
            [0, 0, 0],
        ]
    )
    case_ids = tuple(f"case-{i}" for i in range(6))
    return ScoreMatrix(case_ids, ("l0", "l1", "l2"), scores, truth)


class TestScoreMatrix:
    def test_column_and_pooled(self):
        m = make_matrix()
        s, t = m.column("l1")
        assert list(s) == [0.1, 0.2, 0.3, 0.7, 0.8, 0.9]
        ps, pt = m.pooled()
        assert ps.shape == (18,)
        assert pt.shape == (18,)

    def test_mask_filters_cells(self):
        m = make_matrix()
        mask = np.ones((6, 3), dtype=bool)
        mask[0, 0] = False
        masked = ScoreMatrix(m.case_ids, m.label_ids, m.scores, m.truth, mask)
        s, t = masked.column("l0")
        assert s.shape == (5,)
        ps, _ = masked.pooled()
        assert ps.shape == (17,)

    def test_shape_validation(self):
        with pytest.raises(InputError):
            ScoreMatrix(("a",), ("x",), np.zeros((2, 1)), np.zeros((2, 1)))

    def test_score_range_validation(self):
        with pytest.raises(InputError):
            ScoreMatrix(("a",), ("x",), np.array([[1.5]]), np.array([[1]]))

    def test_binary_truth_validation(self):
        with pytest.raises(InputError):
            ScoreMatrix(("a",), ("x",), np.array([[0.5]]), np.array([[2]]))

    def test_mask_shape_validation(self):
        with pytest.raises(InputError):
            ScoreMatrix(
                ("a",),
                ("x",),
                np.array([[0.5]]),
                np.array([[1]]),
                np.ones((2, 2), dtype=bool),
            )


class TestMacroMicro:
    def test_hand_built_matrix(self):
        result = macro_micro(make_matrix())
        per = result["per_label"]
        assert set(per) == {"l0", "l1"}  # l2 is all-negative
        assert per["l0"]["auroc"] == 1.0
        assert per["l1"]["auroc"] == 0.0
        assert per["l0"]["f1"] == 1.0
        assert per["l1"]["f1"] == 0.0
        assert result["macro_auroc"] == pytest.approx(0.5)
        assert result["macro_f1"] == pytest.approx(0.5)
        assert len(result["warnings"]) == 1
        assert "l2" in result["warnings"][0]

    def test_micro_pools_all_cells(self):
        m = make_matrix()
        result = macro_micro(m)
        ps, pt = m.pooled()
        expected = oracles.auroc_pair_enumeration(ps.tolist(), pt.tolist())
        assert result["micro_auroc"] == pytest.approx(expected, abs=1e-12)

    def test_label_order_invariance(self):
        m = make_matrix()
        reordered = ScoreMatrix(
            m.case_ids,
            ("l2", "l0", "l1"),
            m.scores[:, [2, 0, 1]],
            m.truth[:, [2, 0, 1]],
        )
        a = macro_micro(m)
        b = macro_micro(reordered)
        assert a["macro_auroc"] == pytest.approx(b["macro_auroc"], abs=1e-15)
        assert a["micro_auroc"] == pytest.approx(b["micro_auroc"], abs=1e-15)
        assert a["per_label"]["l0"] == b["per_label"]["l0"]

    def test_per_label_thresholds(self):
        m = make_matrix()
        # l1 scores are anti-correlated; a threshold below every score
        # predicts all positive, giving recall 1 and a nonzero f1
        result = macro_micro(m, thresholds={"l1": 0.05})
        assert result["per_label"]["l1"]["threshold"] == 0.05
        assert result["per_label"]["l1"]["f1"] == pytest.approx(2 * 3 / (2 * 3 + 3))
        assert result["per_label"]["l0"]["threshold"] == 0.5

    def test_all_single_class_raises(self):
        scores = np.array([[0.4], [0.6]])
        truth = np.array([[1], [1]])
        m = ScoreMatrix(("a", "b"), ("x",), scores, truth)
        with pytest.raises(UndefinedMetricError):
            macro_micro(m)

    def test_masked_label_skipped(self):
        m = make_matrix()
        mask = np.ones((6, 3), dtype=bool)
        mask[:3, 1] = False  # hide every positive for l1
        masked = ScoreMatrix(m.case_ids, m.label_ids, m.scores, m.truth, mask)
        result = macro_micro(masked)
        assert "l1" not in result["per_label"]
        assert result["macro_auroc"] == 1.0


# ---------------------------------------------------------------------------
# Pearson correlation


class TestPearson:
    def test_perfect_positive(self):
        r, p = pearson([1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0])
        assert r == 1.0
        assert p == 0.0

    def test_perfect_negative(self):
        r, p = pearson([1.0, 2.0, 3.0], [3.0, 2.0, 1.0])
        assert r == -1.0
        assert p == 0.0

    def test_scipy_agreement(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(3, 50))
            x = rng.normal(size=n)
            y = rng.normal(size=n) + 0.4 * x
            r, p = pearson(x, y)
            expected = sps.pearsonr(x, y)
            assert r == pytest.approx(expected.statistic, abs=1e-12)
            assert p == pytest.approx(expected.pvalue, abs=1e-10)

    def test_zero_variance_raises(self):
        with pytest.raises(UndefinedMetricError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_short_raises(self):
        with pytest.raises(InputError):
            pearson([1.0, 2.0], [2.0, 1.0])

    def test_independent_data_large_p(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=500)
        y = rng.normal(size=500)
        r, p = pearson(x, y)
        assert abs(r) < 0.1
        assert p > 0.05


# ---------------------------------------------------------------------------
# Bootstrap


class TestBootstrap:
    def test_constant_vector_zero_width(self):
        ci = bootstrap_ci([3.0] * 20, "mean", replicates=200, seed=1)
        assert ci.point == 3.0
        assert ci.lower == 3.0
        assert ci.upper == 3.0

    def test_fixed_seed_reproducible(self):
        data = np.random.default_rng(0).normal(size=50)
        a = bootstrap_ci(data, "mean", replicates=300, seed=42)
        b = bootstrap_ci(data, "mean", replicates=300, seed=42)
        assert a == b

    def test_different_seed_different_interval(self):
        data = np.random.default_rng(0).normal(size=50)
        a = bootstrap_ci(data, "mean", replicates=300, seed=1)
        b = bootstrap_ci(data, "mean", replicates=300, seed=2)
        assert (a.lower, a.upper) != (b.lower, b.upper)

    def test_result_echoes_config(self):
        ci = bootstrap_ci([1.0, 2.0, 3.0], "mean", replicates=150, seed=7, level=0.9)
        assert isinstance(ci, CiResult)
        assert ci.level == 0.9
        assert ci.replicates == 150
        assert ci.seed == 7

    def test_interval_brackets_point_for_mean(self):
        data = np.random.default_rng(4).normal(size=80)
        ci = bootstrap_ci(data, "mean", replicates=500, seed=3)
        assert ci.lower <= ci.point <= ci.upper

    def test_median_and_std_statistics(self):
        data = np.random.default_rng(8).exponential(size=60)
        med = bootstrap_ci(data, "median", replicates=200, seed=0)
        std = bootstrap_ci(data, "std", replicates=200, seed=0)
        assert med.lower <= med.upper
        assert std.point == pytest.approx(float(np.std(data, ddof=1)))

    def test_accuracy_statistic(self):
        outcomes = [1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0]
        ci = bootstrap_ci(outcomes, "accuracy", replicates=200, seed=5)
        assert ci.point == pytest.approx(0.75)
        assert 0.0 <= ci.lower <= ci.upper <= 1.0

    def test_accuracy_rejects_nonbinary(self):
        with pytest.raises(InputError):
            bootstrap_ci([0.5, 1.0], "accuracy", replicates=100, seed=0)

    def test_auroc_statistic_on_score_truth_table(self):
        rng = np.random.default_rng(12)
        scores = np.concatenate([rng.uniform(0.5, 1, 25), rng.uniform(0, 0.5, 25)])
        truth = np.array([1.0] * 25 + [0.0] * 25)
        table = np.column_stack([scores, truth])
        ci = bootstrap_ci(table, "auroc", replicates=200, seed=2)
        assert ci.point == 1.0
        assert ci.lower <= ci.upper <= 1.0

    def test_callable_statistic(self):
        data = np.arange(1.0, 21.0)
        ci = bootstrap_ci(
            data, lambda x: float(np.percentile(x, 90)), replicates=200, seed=0
        )
        assert ci.lower <= ci.upper

    def test_axis_cols_resamples_columns(self):
        # identical columns: resampling columns can never change the mean
        table = np.tile(np.array([[1.0], [2.0], [3.0]]), (1, 5))
        ci = bootstrap_ci(table, "mean", replicates=150, seed=0, axis="cols")
        assert ci.lower == ci.upper == ci.point == 2.0
        # identical rows: resampling rows is likewise degenerate
        table_rows = np.tile(np.array([[1.0, 2.0, 3.0]]), (5, 1))
        ci_rows = bootstrap_ci(table_rows, "mean", replicates=150, seed=0, axis="rows")
        assert ci_rows.lower == ci_rows.upper == 2.0

    def test_axis_cols_requires_table(self):
        with pytest.raises(InputError):
            bootstrap_ci([1.0, 2.0, 3.0], "mean", replicates=100, axis="cols")

    def test_width_shrinks_with_sample_size(self):
        rng = np.random.default_rng(77)
        widths = {}
        for n in (100, 400):
            trial_widths = []
            for trial in range(12):
                data = rng.normal(size=n)
                ci = bootstrap_ci(data, "mean", replicates=200, seed=trial)
                trial_widths.append(ci.upper - ci.lower)
            widths[n] = float(np.median(trial_widths))
        assert widths[400] < widths[100]

    def test_bca_close_to_percentile_for_symmetric_data(self):
        data = np.random.default_rng(6).normal(size=60)
        pct = bootstrap_ci(data, "mean", replicates=800, seed=9, method="percentile")
        bca = bootstrap_ci(data, "mean", replicates=800, seed=9, method="bca")
        assert bca.lower == pytest.approx(pct.lower, abs=0.08)
        assert bca.upper == pytest.approx(pct.upper, abs=0.08)
        assert bca.lower < bca.upper

    def test_bca_constant_data(self):
        ci = bootstrap_ci([5.0] * 10, "mean", replicates=150, seed=0, method="bca")
        assert ci.lower == ci.upper == 5.0

    def test_validation(self):
        with pytest.raises(InputError):
            bootstrap_ci([1.0, 2.0], "mean", replicates=50)  # too few replicates
        with pytest.raises(InputError):
            bootstrap_ci([1.0], "mean", replicates=100)  # too few samples
        with pytest.raises(InputError):
            bootstrap_ci([1.0, 2.0], "mean", replicates=100, level=1.2)
        with pytest.raises(InputError):
            bootstrap_ci([1.0, 2.0], "mean", replicates=100, method="jackknife")
        with pytest.raises(InputError):
            bootstrap_ci([1.0, 2.0], "huber", replicates=100)
        with pytest.raises(InputError):
            bootstrap_ci(np.zeros((2, 2, 2)), "mean", replicates=100)
        with pytest.raises(InputError):
            bootstrap_ci([1.0, 2.0], "mean", replicates=100, axis="diag")

    def test_registry_contents(self):
        assert set(BOOTSTRAP_STATISTICS) == {
            "mean",
            "median",
            "std",
            "accuracy",
            "auroc",
        }

    def test_coverage_smoke(self):
        # small-scale version of the acceptance coverage study
        hits = 0
        trials = 150
        rng = np.random.default_rng(123)
        for trial in range(trials):
            data = rng.normal(size=30)
            ci = bootstrap_ci(data, "mean", replicates=200, seed=trial)
            if ci.lower <= 0.0 <= ci.upper:
                hits += 1
        assert 0.88 <= hits / trials <= 0.99


# ---------------------------------------------------------------------------
# Paired t-test


class TestPairedT:
    def test_sleep_study_worked_example(self):
        result = paired_t_test(SLEEP_GROUP_2, SLEEP_GROUP_1)
        assert result.statistic == pytest.approx(4.062127683382037, abs=1e-6)
        assert result.p_value == pytest.approx(0.00283289019738427, abs=1e-6)
        assert result.method == "paired_t"
        assert result.two_sided

    def test_scipy_agreement(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            n = int(rng.integers(3, 40))
            a = rng.normal(size=n)
            b = a + rng.normal(0.2, 0.5, size=n)
            got = paired_t_test(a, b)
            expected = sps.ttest_rel(a, b)
            assert got.statistic == pytest.approx(expected.statistic, abs=1e-10)
            assert got.p_value == pytest.approx(expected.pvalue, abs=1e-10)

    def test_sign_convention(self):
        result = paired_t_test([2.0, 3.0, 4.0], [1.0, 1.5, 2.5])
        assert result.statistic > 0

    def test_zero_variance_degenerate(self):
        with pytest.raises(DegenerateInputError):
            paired_t_test([1.0, 2.0, 3.0], [0.5, 1.5, 2.5])

    def test_identical_vectors_degenerate(self):
        with pytest.raises(DegenerateInputError):
            paired_t_test([1.0, 2.0], [1.0, 2.0])

    def test_shape_validation(self):
        with pytest.raises(InputError):
            paired_t_test([1.0, 2.0], [1.0])
        with pytest.raises(InputError):
            paired_t_test([1.0], [2.0])


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank


class TestWilcoxon:
    def test_all_positive_n6(self):
        # W- = 0; exact two-sided p = 2 / 2^6
        result = wilcoxon_signed_rank([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], [0.0] * 6)
        assert result.statistic == 0.0
        assert result.p_value == pytest.approx(0.03125, abs=1e-15)
        assert result.method == "wilcoxon"

    def test_scipy_exact_agreement_untied(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(4, 15))
            d = rng.normal(0.3, 1.0, size=n)
            while len(np.unique(np.abs(d))) != n or np.any(d == 0):
                d = rng.normal(0.3, 1.0, size=n)
            got = wilcoxon_signed_rank(d, np.zeros(n))
            expected = sps.wilcoxon(d, method="exact")
            assert got.statistic == expected.statistic
            assert got.p_value == pytest.approx(expected.pvalue, abs=1e-12)

    def test_enumeration_oracle_small_n(self):
        rng = np.random.default_rng(17)
        for n in range(1, 11):
            for _ in range(12):
                d = rng.integers(-5, 6, size=n).astype(float)
                d[d == 0] = 1.0  # oracle requires nonzero diffs
                stat, p = oracles.wilcoxon_exact_enumeration(d.tolist())
                got = wilcoxon_signed_rank(d, np.zeros(n))
                assert got.statistic == stat
                assert got.p_value == pytest.approx(p, abs=1e-12)

    def test_enumeration_oracle_with_heavy_ties(self):
        cases = [
            [1.0, 1.0, -1.0],
            [2.0, 2.0, 2.0, -2.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [3.0, 3.0, -3.0, 1.0, 1.0, -1.0],
        ]
        for d in cases:
            stat, p = oracles.wilcoxon_exact_enumeration(d)
            got = wilcoxon_signed_rank(np.array(d), np.zeros(len(d)))
            assert got.statistic == stat
            assert got.p_value == pytest.approx(p, abs=1e-12)

    def test_zero_differences_dropped(self):
        a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]
        b = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]  # first pair ties out
        with_zero = wilcoxon_signed_rank(a, b)
        without = wilcoxon_signed_rank(a[1:], b[1:])
        assert with_zero == without

    def test_all_zero_differences_degenerate(self):
        with pytest.raises(DegenerateInputError):
            wilcoxon_signed_rank([1.0, 2.0], [1.0, 2.0])

    def test_crossover_agreement_at_n25(self):
        # representative continuous case at the exact/approximate boundary
        d = np.random.default_rng(2).normal(0.25, 1.0, size=25)
        assert np.all(d != 0)
        exact = wilcoxon_signed_rank(d, np.zeros(25), exact_limit=25)
        approx = wilcoxon_signed_rank(d, np.zeros(25), exact_limit=24)
        assert exact.statistic == approx.statistic
        assert abs(exact.p_value - approx.p_value) < 0.005

    def test_default_limit_is_25(self):
        d = np.random.default_rng(2).normal(0.25, 1.0, size=25)
        default = wilcoxon_signed_rank(d, np.zeros(25))
        explicit = wilcoxon_signed_rank(d, np.zeros(25), exact_limit=25)
        assert default == explicit

    def test_approx_path_matches_scipy(self):
        rng = np.random.default_rng(41)
        d = rng.normal(0.2, 1.0, size=60)
        d = d[d != 0]
        got = wilcoxon_signed_rank(d, np.zeros(d.size), exact_limit=25)
        expected = sps.wilcoxon(d, method="approx", correction=True)
        assert got.statistic == expected.statistic
        assert got.p_value == pytest.approx(expected.pvalue, abs=1e-10)

    def test_statistic_is_min_side(self):
        d = np.array([5.0, 4.0, 3.0, 2.0, -1.0])
        # ranks: |d| -> 1..5; W+ = 2+3+4+5 = 14, W- = 1
        result = wilcoxon_signed_rank(d, np.zeros(5))
        assert result.statistic == 1.0

    def test_shape_validation(self):
        with pytest.raises(InputError):
            wilcoxon_signed_rank([1.0, 2.0], [1.0])

    def test_p_value_capped_at_one(self):
        # perfectly balanced case pushes the doubled tail over 1
        d = np.array([1.0, -1.0])
        result = wilcoxon_signed_rank(d, np.zeros(2))
        assert result.p_value == 1.0
