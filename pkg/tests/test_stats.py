"""Tests for the from-scratch statistical toolkit.

Golden values below were generated once via tools/make_goldens.py with
scipy 1.15.3 and frozen here; several tests additionally cross-check
against the live scipy install as an independent second route.
"""

import math

import numpy as np
import pytest
from scipy import special as sp_special
from scipy import stats as sp_stats

from socialdqn.stats import (
    AnovaResult,
    f_cdf,
    f_sf,
    format_mean_std,
    mean_ci,
    one_way_anova,
    regularized_incomplete_beta,
    significance_stars,
    student_t_cdf,
    student_t_quantile,
    studentized_range_cdf,
    tukey_hsd,
)

# frozen reference values (tools/make_goldens.py, scipy 1.15.3)
ANOVA_TEXTBOOK_F = 9.591107036442812
ANOVA_TEXTBOOK_P = 0.0032482226008592996
ANOVA_UNBALANCED_F = 3.370811462291587
ANOVA_UNBALANCED_P = 0.06890397897508933
F_CDF_GOLDENS = [
    (1.0, 3, 10, 0.567662796978303),
    (2.5, 2, 6, 0.8377160030052593),
    (0.5, 5, 5, 0.23251131913037862),
    (3.0, 2, 6, 0.875),
    (1.2, 8, 40, 0.6763848017293054),
]
T_QUANTILE_GOLDENS = [
    (1, 12.706204736432095),
    (2, 4.302652729696142),
    (5, 2.570581835636314),
    (10, 2.2281388519649385),
    (30, 2.0422724563012373),
    (120, 1.9799304050527766),
]
STUDENTIZED_RANGE_GOLDENS = [
    (1.0, 2, 2, 0.447213595499958),
    (2.0, 3, 10, 0.6294553249645047),
    (3.5, 3, 12, 0.9300045147248164),
    (3.0, 4, 6, 0.7527359553177),
    (4.5, 5, 20, 0.9662705058144198),
    (2.5, 10, 45, 0.24906486643347972),
    (6.0, 3, 3, 0.951931928127137),
]
TUKEY_TEXTBOOK_GOLDENS = [
    (0, 1, -2.38, 0.022340407138528917),
    (0, 2, -3.219999999999998, 0.0031393490114589584),
    (1, 2, -0.8399999999999981, 0.5313033890266915),
]
TUKEY_UNBALANCED_GOLDENS = [
    (0, 1, -15.533333333333337, 0.056979188109091305),
    (0, 2, -5.563333333333334, 0.5966516131298027),
    (1, 2, 9.970000000000002, 0.2824412409692816),
]

TEXTBOOK = {
    "a": [6.9, 5.4, 5.8, 4.6, 4.0],
    "b": [8.3, 6.8, 7.8, 9.2, 6.5],
    "c": [8.0, 10.5, 8.1, 6.9, 9.3],
}
UNBALANCED = {
    "a": [12.1, 14.8, 15.3, 11.4, 10.8, 13.1],
    "b": [18.3, 49.6, 10.3, 35.6],
    "c": [24.3, 19.6, 19.0, 11.4, 18.1],
}


def random_samples(rng, min_groups=2, max_groups=4, min_n=3, max_n=8):
    n_groups = int(rng.integers(min_groups, max_groups + 1))
    out = {}
    for g in range(n_groups):
        n = int(rng.integers(min_n, max_n + 1))
        out[f"g{g}"] = (rng.normal(loc=rng.normal(0, 2), size=n) * 3.0).tolist()
    return out


# ---------------------------------------------------------------------------
# incomplete beta and F distribution


def test_betainc_edges_and_closed_forms():
    assert regularized_incomplete_beta(3.0, 1.0, 0.0) == 0.0
    assert regularized_incomplete_beta(3.0, 1.0, 1.0) == 1.0
    for x in np.linspace(0.05, 0.95, 10):
        # I_x(a, 1) = x**a and I_x(1, b) = 1 - (1-x)**b
        assert regularized_incomplete_beta(3.0, 1.0, x) == pytest.approx(x**3, rel=1e-12)
        assert regularized_incomplete_beta(1.0, 2.5, x) == pytest.approx(
            1.0 - (1.0 - x) ** 2.5, rel=1e-12
        )
    assert regularized_incomplete_beta(3.0, 1.0, 0.5) == pytest.approx(0.125, abs=1e-15)
    with pytest.raises(ValueError):
        regularized_incomplete_beta(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        regularized_incomplete_beta(1.0, -2.0, 0.5)


def test_betainc_against_scipy_grid():
    for a in (0.5, 1.0, 2.5, 7.0, 30.0):
        for b in (0.5, 1.0, 2.5, 7.0, 30.0):
            for x in np.linspace(0.01, 0.99, 21):
                want = float(sp_special.betainc(a, b, x))
                got = regularized_incomplete_beta(a, b, float(x))
                assert got == pytest.approx(want, abs=1e-12)


def test_f_cdf_golden_values():
    for x, d1, d2, want in F_CDF_GOLDENS:
        assert f_cdf(x, d1, d2) == pytest.approx(want, abs=1e-8)
        assert f_sf(x, d1, d2) == pytest.approx(1.0 - want, abs=1e-8)


def test_f_sf_against_scipy_grid():
    for d1 in (1, 2, 5, 12):
        for d2 in (2, 6, 20, 60):
            for x in (0.1, 0.5, 1.0, 2.0, 5.0, 20.0):
                assert f_sf(x, d1, d2) == pytest.approx(
                    float(sp_stats.f.sf(x, d1, d2)), abs=1e-10
                )
    assert f_sf(0.0, 3, 9) == 1.0
    assert f_sf(float("inf"), 3, 9) == 0.0


# ---------------------------------------------------------------------------
# ANOVA


def test_anova_hand_example():
    # means 2,3,4 around grand mean 3: SSB = 6 over 2 df, SSW = 6 over 6 df
    result = one_way_anova({"x": [1, 2, 3], "y": [2, 3, 4], "z": [3, 4, 5]})
    assert result.f_statistic == pytest.approx(3.0, abs=1e-12)
    # p = I_{0.5}(3, 1) = 0.125 exactly
    assert result.p_value == pytest.approx(0.125, abs=1e-12)
    assert not result.degenerate


def test_anova_identical_groups():
    result = one_way_anova({"x": [5.0, 5.0, 5.0], "y": [5.0, 5.0, 5.0]})
    assert result.f_statistic == 0.0
    assert result.p_value == 1.0
    result = one_way_anova({"x": [1.0, 2.0, 3.0], "y": [1.0, 2.0, 3.0]})
    assert result.f_statistic == 0.0
    assert result.p_value == 1.0


def test_anova_degenerate_within_variance():
    result = one_way_anova({"x": [1.0, 1.0], "y": [2.0, 2.0]})
    assert result.degenerate
    assert result.p_value == 0.0
    assert math.isinf(result.f_statistic)


def test_anova_validation():
    with pytest.raises(ValueError):
        one_way_anova({"x": [1.0, 2.0]})
    with pytest.raises(ValueError):
        one_way_anova({"x": [1.0, 2.0], "y": [3.0]})
    with pytest.raises(ValueError):
        one_way_anova({})


def test_anova_textbook_goldens():
    result = one_way_anova(TEXTBOOK)
    assert result.f_statistic == pytest.approx(ANOVA_TEXTBOOK_F, rel=1e-9)
    assert result.p_value == pytest.approx(ANOVA_TEXTBOOK_P, abs=1e-6)
    result = one_way_anova(UNBALANCED)
    assert result.f_statistic == pytest.approx(ANOVA_UNBALANCED_F, rel=1e-9)
    assert result.p_value == pytest.approx(ANOVA_UNBALANCED_P, abs=1e-6)


def test_anova_against_scipy_random():
    rng = np.random.default_rng(41)
    for _ in range(40):
        samples = random_samples(rng)
        want_f, want_p = sp_stats.f_oneway(*samples.values())
        result = one_way_anova(samples)
        assert result.f_statistic == pytest.approx(float(want_f), rel=1e-9)
        assert result.p_value == pytest.approx(float(want_p), abs=1e-10)


def test_anova_shift_and_scale_invariance():
    rng = np.random.default_rng(42)
    for _ in range(10):
        samples = random_samples(rng)
        base = one_way_anova(samples)
        shifted = {k: [x + 37.5 for x in v] for k, v in samples.items()}
        scaled = {k: [x * 0.125 for x in v] for k, v in samples.items()}
        assert one_way_anova(shifted).p_value == pytest.approx(base.p_value, rel=1e-8)
        assert one_way_anova(scaled).p_value == pytest.approx(base.p_value, rel=1e-8)


# ---------------------------------------------------------------------------
# Student t and confidence intervals


def test_t_quantile_goldens():
    for df, want in T_QUANTILE_GOLDENS:
        assert student_t_quantile(0.975, df) == pytest.approx(want, abs=1e-8)
        assert student_t_quantile(0.025, df) == pytest.approx(-want, abs=1e-8)
    assert student_t_quantile(0.5, 7) == 0.0


def test_t_cdf_against_scipy():
    for df in (1, 3, 8, 25):
        for t in (-4.0, -1.0, 0.0, 0.5, 2.0, 6.0):
            assert student_t_cdf(t, df) == pytest.approx(
                float(sp_stats.t.cdf(t, df)), abs=1e-12
            )


def test_mean_ci_constant_sample():
    mean, half = mean_ci([2.5, 2.5, 2.5, 2.5])
    assert mean == 2.5
    assert half == 0.0


def test_mean_ci_arithmetic():
    mean, half = mean_ci([1.0, 2.0, 3.0])
    assert mean == pytest.approx(2.0, abs=0)
    # s = 1, n = 3, t quantile for 2 df frozen above
    assert half == pytest.approx(4.302652729696142 / math.sqrt(3), rel=1e-9)


def test_mean_ci_normal_limit():
    rng = np.random.default_rng(43)
    n = 2000
    x = rng.normal(size=n)
    x = (x - x.mean()) / x.std(ddof=1)
    mean, half = mean_ci(x.tolist())
    assert mean == pytest.approx(0.0, abs=1e-12)
    assert half == pytest.approx(1.959963985 / math.sqrt(n), rel=0.01)


def test_mean_ci_validation():
    with pytest.raises(ValueError):
        mean_ci([1.0])
    with pytest.raises(ValueError):
        mean_ci([1.0, 2.0], level=1.5)


# ---------------------------------------------------------------------------
# studentized range distribution


def test_studentized_range_goldens():
    for q, k, df, want in STUDENTIZED_RANGE_GOLDENS:
        assert studentized_range_cdf(q, k, df) == pytest.approx(want, abs=1e-4)
    # closed form for k=2, df=2: P(Q <= 1) = 1/sqrt(5)
    assert studentized_range_cdf(1.0, 2, 2) == pytest.approx(1 / math.sqrt(5), abs=1e-6)


def test_studentized_range_against_scipy():
    rng = np.random.default_rng(44)
    for _ in range(12):
        q = float(rng.uniform(0.5, 6.0))
        k = int(rng.choice([2, 3, 5, 8]))
        df = int(rng.choice([2, 5, 15, 40]))
        want = float(sp_stats.studentized_range.cdf(q, k, df))
        assert studentized_range_cdf(q, k, df) == pytest.approx(want, abs=1e-4)


def test_studentized_range_bounds_and_monotonicity():
    assert studentized_range_cdf(0.0, 3, 10) == 0.0
    assert studentized_range_cdf(-1.0, 3, 10) == 0.0
    values = [studentized_range_cdf(q, 4, 12) for q in (0.5, 1.5, 2.5, 3.5, 5.0, 7.0)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] > 0.99
    with pytest.raises(ValueError):
        studentized_range_cdf(2.0, 1, 10)
    with pytest.raises(ValueError):
        studentized_range_cdf(2.0, 3, 0)


# ---------------------------------------------------------------------------
# Tukey HSD


def test_tukey_identical_groups():
    rows = tukey_hsd({"x": [3.0, 4.0, 5.0], "y": [3.0, 4.0, 5.0], "z": [3.0, 4.0, 5.0]})
    assert len(rows) == 3
    for row in rows:
        assert row.q_statistic == 0.0
        assert row.p_value == 1.0
        assert not row.significant


def test_tukey_two_groups_matches_t_test():
    rng = np.random.default_rng(45)
    for _ in range(8):
        a = rng.normal(0.0, 1.0, size=int(rng.integers(3, 9)))
        b = rng.normal(0.7, 1.3, size=int(rng.integers(3, 9)))
        rows = tukey_hsd({"a": a.tolist(), "b": b.tolist()})
        assert len(rows) == 1
        row = rows[0]
        # pooled two-sample t: q = sqrt(2) |t|, identical p value
        na, nb = len(a), len(b)
        pooled = ((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()
        pooled /= na + nb - 2
        t = (a.mean() - b.mean()) / math.sqrt(pooled * (1 / na + 1 / nb))
        assert row.q_statistic == pytest.approx(math.sqrt(2) * abs(t), rel=1e-12)
        want_p = float(sp_stats.ttest_ind(a, b, equal_var=True).pvalue)
        assert row.p_value == pytest.approx(want_p, abs=1e-4)


def test_tukey_textbook_goldens():
    names = list(TEXTBOOK)
    rows = tukey_hsd(TEXTBOOK)
    assert [(r.group_a, r.group_b) for r in rows] == [("a", "b"), ("a", "c"), ("b", "c")]
    for row, (i, j, want_diff, want_p) in zip(rows, TUKEY_TEXTBOOK_GOLDENS):
        assert (row.group_a, row.group_b) == (names[i], names[j])
        assert row.mean_difference == pytest.approx(want_diff, rel=1e-12)
        assert row.p_value == pytest.approx(want_p, abs=1e-3)
        assert row.significant == (want_p <= 0.05)


def test_tukey_unbalanced_goldens():
    rows = tukey_hsd(UNBALANCED)
    for row, (_, _, want_diff, want_p) in zip(rows, TUKEY_UNBALANCED_GOLDENS):
        assert row.mean_difference == pytest.approx(want_diff, rel=1e-12)
        assert row.p_value == pytest.approx(want_p, abs=1e-3)


def test_tukey_against_scipy_random():
    rng = np.random.default_rng(46)
    for _ in range(10):
        samples = random_samples(rng, min_groups=2, max_groups=4)
        res = sp_stats.tukey_hsd(*samples.values())
        rows = tukey_hsd(samples)
        names = list(samples)
        index = {name: i for i, name in enumerate(names)}
        for row in rows:
            i, j = index[row.group_a], index[row.group_b]
            assert row.p_value == pytest.approx(float(res.pvalue[i, j]), abs=1e-3)
            assert row.mean_difference == pytest.approx(float(res.statistic[i, j]), rel=1e-9)


def test_tukey_degenerate_variance():
    rows = tukey_hsd({"x": [1.0, 1.0], "y": [2.0, 2.0], "z": [1.0, 1.0]})
    table = {(r.group_a, r.group_b): r for r in rows}
    assert table[("x", "y")].p_value == 0.0
    assert table[("x", "y")].significant
    assert math.isinf(table[("x", "y")].q_statistic)
    assert table[("x", "z")].p_value == 1.0
    assert not table[("x", "z")].significant


def test_tukey_alpha_threshold():
    rows_05 = tukey_hsd(TEXTBOOK, alpha=0.05)
    rows_01 = tukey_hsd(TEXTBOOK, alpha=0.01)
    flags_05 = [r.significant for r in rows_05]
    flags_01 = [r.significant for r in rows_01]
    assert flags_05 == [True, True, False]
    assert flags_01 == [False, True, False]
    with pytest.raises(ValueError):
        tukey_hsd(TEXTBOOK, alpha=0.0)


def test_tukey_anova_soft_consistency():
    # soft property: tukey significance should rarely appear when the
    # anova cannot reject; logged for inspection, not asserted
    rng = np.random.default_rng(47)
    conflicts = 0
    total = 0
    for _ in range(40):
        samples = random_samples(rng, min_groups=3, max_groups=3, min_n=4, max_n=6)
        anova_p = one_way_anova(samples).p_value
        any_sig = any(r.significant for r in tukey_hsd(samples))
        total += 1
        if any_sig and anova_p > 0.05:
            conflicts += 1
    print(f"tukey-vs-anova conflicts: {conflicts}/{total}")


# ---------------------------------------------------------------------------
# rendering helpers


def test_significance_stars():
    assert significance_stars(0.2) == ""
    assert significance_stars(0.05) == "*"
    assert significance_stars(0.04) == "*"
    assert significance_stars(0.01) == "**"
    assert significance_stars(0.009) == "**"
    assert significance_stars(0.001) == "***"
    assert significance_stars(0.0005) == "***"
    assert significance_stars(0.0001) == "****"
    assert significance_stars(1e-9) == "****"


def test_format_mean_std():
    assert format_mean_std(0.58345, 0.0412) == "(0.58, 0.04)"
    assert format_mean_std(12.0, 3.14159, digits=3) == "(12.000, 3.142)"


def test_anova_result_is_named():
    result = one_way_anova({"x": [1.0, 2.0], "y": [4.0, 5.0]})
    assert isinstance(result, AnovaResult)
    assert set(("f_statistic", "p_value", "degenerate")) <= set(result._fields)
