import math

import numpy as np
import pytest
import scipy.stats

from metatutor import metrics_stats as ms


class TestNlg:
    def test_logic_means(self):
        assert ms.nlg(0.559, 0.877) == pytest.approx(0.4789, abs=1e-4)

    def test_probability_means(self):
        assert ms.nlg(0.757, 0.949) == pytest.approx(0.3895, abs=1e-4)

    def test_zero_gain(self):
        for x in (0.0, 0.3, 0.99):
            assert ms.nlg(x, x) == 0.0

    def test_sign(self):
        assert ms.nlg(0.5, 0.6) > 0
        assert ms.nlg(0.6, 0.5) < 0

    def test_undefined_at_max(self):
        with pytest.raises(ValueError, match="maximum pre-score"):
            ms.nlg(1.0, 1.0)

    def test_monotone_in_post(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            pre = rng.uniform(0, 0.99)
            p1, p2 = sorted(rng.uniform(0, 1, size=2))
            assert ms.nlg(pre, p1) <= ms.nlg(pre, p2)


def textbook_chi_square(table):
    """Independent oracle: scipy's Pearson chi-square without correction."""
    stat, _, df, _ = scipy.stats.chi2_contingency(np.asarray(table), correction=False)
    return stat, df


class TestChiSquare:
    def test_study_decision_counts(self):
        stat, df = ms.chi_square([[94, 65, 127], [82, 74, 156]])
        assert stat == pytest.approx(3.2485, abs=0.01)
        assert df == 2

    def test_independent_table(self):
        stat, df = ms.chi_square([[10, 10], [10, 10]])
        assert stat == 0.0
        assert df == 1

    def test_matches_textbook_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            table = rng.integers(1, 100, size=(2, 2))
            stat, df = ms.chi_square(table)
            ref_stat, ref_df = textbook_chi_square(table)
            assert stat == pytest.approx(ref_stat, abs=1e-10)
            assert df == ref_df

    def test_row_column_swap_invariance(self):
        table = np.array([[5, 9, 14], [11, 3, 8]])
        stat, _ = ms.chi_square(table)
        assert ms.chi_square(table[::-1])[0] == pytest.approx(stat)
        assert ms.chi_square(table[:, [2, 0, 1]])[0] == pytest.approx(stat)

    def test_proportional_rows(self):
        stat, _ = ms.chi_square([[2, 4, 6], [3, 6, 9]])
        assert stat == pytest.approx(0.0, abs=1e-12)

    def test_zero_marginal(self):
        with pytest.raises(ValueError, match="zero marginal"):
            ms.chi_square([[0, 5], [0, 7]])


class TestOneWayAnova:
    def test_identical_groups(self):
        f, dfb, dfw = ms.one_way_anova([[1, 2, 3], [1, 2, 3], [1, 2, 3]])
        assert f == pytest.approx(0.0)
        assert (dfb, dfw) == (2, 6)

    def test_equal_means(self):
        f, _, _ = ms.one_way_anova([[1, 2, 3], [1, 2, 3]])
        assert f == pytest.approx(0.0)

    def test_hand_computation(self):
        f, dfb, dfw = ms.one_way_anova([[1, 2], [3, 4]])
        assert f == pytest.approx(8.0)
        assert (dfb, dfw) == (1, 2)

    def test_matches_scipy(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            groups = [rng.normal(size=int(rng.integers(3, 20))) for _ in range(3)]
            f, _, _ = ms.one_way_anova(groups)
            ref = scipy.stats.f_oneway(*groups).statistic
            assert f == pytest.approx(ref, abs=1e-10)

    def test_shift_and_scale_invariance(self):
        rng = np.random.default_rng(3)
        groups = [rng.normal(size=8) for _ in range(3)]
        f, _, _ = ms.one_way_anova(groups)
        assert ms.one_way_anova([g + 5.0 for g in groups])[0] == pytest.approx(f)
        assert ms.one_way_anova([g * 3.0 for g in groups])[0] == pytest.approx(f)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            ms.one_way_anova([[1, 1], [1, 1]])


def record(sid, group, pre, post, iso=None):
    return ms.ScoreRecord(sid, group, pre, post, iso if iso is not None else post)


class TestSummaryTable:
    def test_single_student(self):
        table = ms.summary_table([record("s0", "DRL", 0.5, 0.75)])
        assert table["DRL"]["NLG"][0] == pytest.approx(0.25 / math.sqrt(0.5), abs=1e-4)

    def test_identical_students_sd_zero(self):
        table = ms.summary_table([record("s0", "DRL", 0.4, 0.8),
                                  record("s1", "DRL", 0.4, 0.8)])
        for row in ms.SUMMARY_ROWS:
            assert table["DRL"][row][1] == 0.0

    def test_matches_brute_force_aggregation(self):
        rng = np.random.default_rng(4)
        records = []
        for i in range(40):
            pre = rng.uniform(0.1, 0.9)
            post = rng.uniform(0.1, 1.0)
            iso = rng.uniform(0.1, 1.0)
            records.append(record(f"s{i}", "G" + str(i % 2), pre, post, iso))
        table = ms.summary_table(records)
        for g in ("G0", "G1"):
            sub = [r for r in records if r.group == g]
            nlgs = [(r.post - r.pre) / math.sqrt(1 - r.pre) for r in sub]
            assert table[g]["NLG"][0] == pytest.approx(np.mean(nlgs), abs=1e-12)
            assert table[g]["NLG"][1] == pytest.approx(np.std(nlgs), abs=1e-12)
            assert table[g]["Pre"][0] == pytest.approx(
                np.mean([r.pre for r in sub]), abs=1e-12)
            assert table[g]["Iso. Post"][0] == pytest.approx(
                np.mean([r.iso_post for r in sub]), abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            ms.summary_table([])

    def test_render_and_csv(self, tmp_path):
        table = ms.summary_table([record("s0", "DRL", 0.5, 0.75),
                                  record("s1", "Ctrl", 0.5, 0.6)])
        text = ms.render_summary(table)
        assert "NLG" in text and "DRL" in text
        path = tmp_path / "summary.csv"
        ms.write_summary_csv(table, path)
        assert path.read_text().splitlines()[0].startswith("metric,")
