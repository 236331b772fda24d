"""Agent sandbox kernel and evaluation suite."""

from ._psim import (
    BusyError,
    DegenerateDataError,
    Error,
    InputError,
    InsufficientDataError,
    Kernel,
    LookupError,
    activity_level,
    audit,
    cohens_d,
    delta_overall,
    dunn_posthoc_holm,
    euclid_distance,
    kruskal_wallis,
    metrics,
    parse_ablations,
    score_bfi,
    trueskill_rank,
    wilcoxon_signed_rank,
)

__all__ = [
    "BusyError",
    "DegenerateDataError",
    "Error",
    "InputError",
    "InsufficientDataError",
    "Kernel",
    "LookupError",
    "activity_level",
    "audit",
    "cohens_d",
    "delta_overall",
    "dunn_posthoc_holm",
    "euclid_distance",
    "kruskal_wallis",
    "metrics",
    "parse_ablations",
    "score_bfi",
    "trueskill_rank",
    "wilcoxon_signed_rank",
]
