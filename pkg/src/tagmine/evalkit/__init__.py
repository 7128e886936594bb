"""
Evaluation paradigms: tagging mAP and P/R/F1, threshold sweeps, captions scored as
tag predictions, and retrieval Recall@K.
"""

from .caption import caption_tag_sets, eval_caption_as_tagger
from .metrics import (
    PRF,
    PRFReport,
    ScoredPredictions,
    SweepRow,
    average_precision,
    mean_ap,
    parse_grid,
    per_category_ap,
    prf_at_threshold,
    prf_from_binary,
    threshold_sweep,
)
from .retrieval import recall_at_k

__all__ = [
    "PRF",
    "PRFReport",
    "ScoredPredictions",
    "SweepRow",
    "average_precision",
    "caption_tag_sets",
    "eval_caption_as_tagger",
    "mean_ap",
    "parse_grid",
    "per_category_ap",
    "prf_at_threshold",
    "prf_from_binary",
    "recall_at_k",
    "threshold_sweep",
]
