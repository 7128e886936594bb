"""
Framework-free pre-training objectives with analytic gradients.

    bce_loss / asl_loss  multi-label tagging over probabilities
    lm_loss              token cross-entropy over logits
    itc_loss             symmetric image-text contrastive loss
    itm_loss             image-text matching
"""

from .alignment import hard_negative_sample, itc_loss, itm_loss, mine_hard_negatives, negative_probabilities
from .gradcheck import KERNELS, GradcheckRow, check_gradient, format_report, gradcheck_suite, numeric_gradient
from .sequence import lm_loss
from .tagging import asl_loss, bce_loss
from .types import EPS, IGNORE, PAD, EmbeddingBatch, FocusParams, LabelMatrix, ProbMatrix, TokenBatch

__all__ = [
    "EPS",
    "IGNORE",
    "KERNELS",
    "PAD",
    "EmbeddingBatch",
    "FocusParams",
    "GradcheckRow",
    "LabelMatrix",
    "ProbMatrix",
    "TokenBatch",
    "asl_loss",
    "bce_loss",
    "check_gradient",
    "format_report",
    "gradcheck_suite",
    "hard_negative_sample",
    "itc_loss",
    "itm_loss",
    "lm_loss",
    "mine_hard_negatives",
    "negative_probabilities",
    "numeric_gradient",
]
