"""Generate golden reference values for the stats test suite.

Run once with scipy installed; paste the printed literals into
tests/test_stats.py. Keeping the goldens frozen in the test file makes
the accuracy pins independent of whichever scipy version happens to be
installed when the suite runs.

Usage: python3 tools/make_goldens.py
"""

import numpy as np
from scipy import stats

# canonical three-group dataset used for the ANOVA and Tukey goldens
GROUP_A = [6.9, 5.4, 5.8, 4.6, 4.0]
GROUP_B = [8.3, 6.8, 7.8, 9.2, 6.5]
GROUP_C = [8.0, 10.5, 8.1, 6.9, 9.3]

# unbalanced second dataset to exercise unequal group sizes
UNBAL_A = [12.1, 14.8, 15.3, 11.4, 10.8, 13.1]
UNBAL_B = [18.3, 49.6, 10.3, 35.6]
UNBAL_C = [24.3, 19.6, 19.0, 11.4, 18.1]


def main():
    print("# --- ANOVA goldens ---")
    f, p = stats.f_oneway(GROUP_A, GROUP_B, GROUP_C)
    print(f"ANOVA_TEXTBOOK_F = {f!r}")
    print(f"ANOVA_TEXTBOOK_P = {p!r}")
    f2, p2 = stats.f_oneway(UNBAL_A, UNBAL_B, UNBAL_C)
    print(f"ANOVA_UNBALANCED_F = {f2!r}")
    print(f"ANOVA_UNBALANCED_P = {p2!r}")

    print("# --- F distribution CDF goldens (x, dfn, dfd, cdf) ---")
    f_args = [(1.0, 3, 10), (2.5, 2, 6), (0.5, 5, 5), (3.0, 2, 6), (1.2, 8, 40)]
    rows = [(x, d1, d2, stats.f.cdf(x, d1, d2)) for x, d1, d2 in f_args]
    print(f"F_CDF_GOLDENS = {rows!r}")

    print("# --- Student t 0.975 quantiles (df, quantile) ---")
    t_rows = [(df, stats.t.ppf(0.975, df)) for df in (1, 2, 5, 10, 30, 120)]
    print(f"T_QUANTILE_GOLDENS = {t_rows!r}")

    print("# --- studentized range CDF goldens (q, k, df, cdf) ---")
    sr_args = [
        (1.0, 2, 2),
        (2.0, 3, 10),
        (3.5, 3, 12),
        (3.0, 4, 6),
        (4.5, 5, 20),
        (2.5, 10, 45),
        (6.0, 3, 3),
    ]
    sr_rows = [(q, k, df, stats.studentized_range.cdf(q, k, df)) for q, k, df in sr_args]
    print(f"STUDENTIZED_RANGE_GOLDENS = {sr_rows!r}")

    print("# --- Tukey HSD goldens: textbook dataset, pairs in index order ---")
    res = stats.tukey_hsd(GROUP_A, GROUP_B, GROUP_C)
    pairs = [(0, 1), (0, 2), (1, 2)]
    tukey = [(i, j, res.statistic[i, j], res.pvalue[i, j]) for i, j in pairs]
    print(f"TUKEY_TEXTBOOK_GOLDENS = {tukey!r}")
    res2 = stats.tukey_hsd(UNBAL_A, UNBAL_B, UNBAL_C)
    tukey2 = [(i, j, res2.statistic[i, j], res2.pvalue[i, j]) for i, j in pairs]
    print(f"TUKEY_UNBALANCED_GOLDENS = {tukey2!r}")


if __name__ == "__main__":
    main()
