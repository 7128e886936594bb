"""
Multi-label tagging objectives over probabilities: binary cross-entropy and the
asymmetric focal loss.

Both sum over labelled categories and average over the batch. Gradients are taken
with respect to the (clamped) probabilities; chain through the sigmoid for logits.
"""

from typing import Tuple, Union

import numpy as np

from ..errors import DataError, ShapeError
from .types import FocusParams, LabelMatrix, ProbMatrix

LossAndGradient = Tuple[float, np.ndarray]


def _as_labels(labels: Union[LabelMatrix, np.ndarray]) -> LabelMatrix:
    return labels if isinstance(labels, LabelMatrix) else LabelMatrix(labels)


def _as_probs(probs: Union[ProbMatrix, np.ndarray]) -> ProbMatrix:
    return probs if isinstance(probs, ProbMatrix) else ProbMatrix(probs)


def _focal_binary(labels: LabelMatrix, probs: ProbMatrix, gamma_pos: float, gamma_neg: float) -> LossAndGradient:
    if labels.shape != probs.shape:
        raise ShapeError(f"labels {labels.shape} and probabilities {probs.shape} differ")
    mask = labels.mask
    if not mask.any():
        raise DataError("every label is IGNORE; the loss is undefined")

    p = probs.values
    q = 1.0 - p
    pos = (labels.values == 1).astype(np.float64)
    neg = (labels.values == 0).astype(np.float64)
    log_p = np.log(p)
    log_q = np.log(q)
    weight_pos = q ** gamma_pos
    weight_neg = p ** gamma_neg

    elementwise = -(pos * weight_pos * log_p + neg * weight_neg * log_q)
    batch = p.shape[0]
    loss = float(elementwise.sum() / batch)

    grad_pos = gamma_pos * q ** (gamma_pos - 1.0) * log_p - weight_pos / p
    grad_neg = -gamma_neg * p ** (gamma_neg - 1.0) * log_q + weight_neg / q
    grad = (pos * grad_pos + neg * grad_neg) / batch
    return loss, grad


def bce_loss(labels: Union[LabelMatrix, np.ndarray], probs: Union[ProbMatrix, np.ndarray]) -> LossAndGradient:
    """
    Binary cross-entropy summed over categories, averaged over the batch.

    Args:
        labels: B x C labels over {0, 1, IGNORE}.
        probs: B x C probabilities.

    Returns:
        (loss, B x C gradient with respect to probs); IGNORE cells have zero gradient.

    Raises:
        ShapeError: If the shapes differ.
    """
    return _focal_binary(_as_labels(labels), _as_probs(probs), 0.0, 0.0)


def asl_loss(
    labels: Union[LabelMatrix, np.ndarray],
    probs: Union[ProbMatrix, np.ndarray],
    focus: FocusParams = FocusParams(),
) -> LossAndGradient:
    """
    Asymmetric loss: -[y (1-p)^gamma_pos log p + (1-y) p^gamma_neg log(1-p)].

    There is no probability margin shift. With both exponents 0 the result is
    bit-identical to bce_loss.

    Args:
        labels: B x C labels over {0, 1, IGNORE}.
        probs: B x C probabilities.
        focus: Focusing exponents.

    Returns:
        (loss, B x C gradient with respect to probs).
    """
    return _focal_binary(_as_labels(labels), _as_probs(probs), float(focus.gamma_pos), float(focus.gamma_neg))
