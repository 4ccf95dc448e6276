"""Decide whether one classifier beats another across many datasets.

Per-dataset error differences are ranked by magnitude; the Wilcoxon statistic
T = min(R+, R-) and the sign test's adjusted win count are compared against
exact small-sample critical values. Ranks of tied differences are averaged
and ties split evenly between the two methods.
"""
from nre.stats import (
    ComparisonTable,
    format_comparison_report,
    sign_test,
    wilcoxon_signed_rank,
)

# test errors (%) of a 512-tree random forest vs a neural rule ensemble on 19
# public benchmarks
FOREST_VS_ENSEMBLE = [
    ("madelon", 26.40, 10.30),
    ("wilt", 21.60, 10.40),
    ("coil2000", 7.06, 5.83),
    ("phoneme", 9.00, 8.14),
    ("banana", 9.56, 8.93),
    ("titanic", 27.49, 26.89),
    ("spambase", 4.92, 4.63),
    ("twonorm", 2.52, 2.25),
    ("adult", 14.47, 14.22),
    ("kr-vs-kp", 0.42, 0.20),
    ("magic", 11.88, 11.67),
    ("hypothyroid", 1.68, 1.47),
    ("chess", 0.62, 0.42),
    ("ring", 3.33, 3.51),
    ("agaricus-lepiota", 0.00, 0.00),
    ("mushroom", 0.00, 0.00),
    ("dis", 1.77, 1.77),
    ("clean2", 0.00, 0.00),
    ("churn", 4.13, 4.13),
]

table = ComparisonTable(FOREST_VS_ENSEMBLE)
report = format_comparison_report(
    table,
    label_a="RF",
    label_b="NRE",
    wilcoxon=wilcoxon_signed_rank(table),
    sign=sign_test(table),
)
print(report)

print()
print("reading the verdicts: T at or below the critical value rejects the null")
print("(no difference between classifiers); so does reaching the critical win count.")
