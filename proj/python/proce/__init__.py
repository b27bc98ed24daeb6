"""Causality-preserving counterfactual explanations for tabular classifiers.

Thin re-export of the compiled extension: numeric kernels (dominance,
sorting, crowding, the paired t-test) plus the file-driven pipeline stages
(gen_simple_bn, train, fit_scm, explain, evaluate).
"""

from ._proce import (
    __version__,
    cross_entropy,
    crowding_distance,
    dominates,
    evaluate,
    explain,
    fit_scm,
    gen_simple_bn,
    incomplete_beta,
    non_dominated_sort,
    paired_t_test,
    sigmoid,
    student_t_two_sided_p,
    train,
)

__all__ = [
    "__version__",
    "cross_entropy",
    "crowding_distance",
    "dominates",
    "evaluate",
    "explain",
    "fit_scm",
    "gen_simple_bn",
    "incomplete_beta",
    "non_dominated_sort",
    "paired_t_test",
    "sigmoid",
    "student_t_two_sided_p",
    "train",
]
