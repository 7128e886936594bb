from typing import Tuple

import numpy as np

from ..errors import DataError
from .types import TokenBatch


def log_softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def lm_loss(batch: TokenBatch) -> Tuple[float, np.ndarray]:
    """
    Token-level cross-entropy averaged over non-PAD positions.

    Each row of logits scores the token at that position; conditioning on the prefix
    is the caller's business.

    Returns:
        (loss, N x V gradient with respect to the logits); PAD rows get zero gradient.

    Raises:
        DataError: If every target is PAD.
    """
    mask = batch.mask
    n_real = int(mask.sum())
    if n_real == 0:
        raise DataError("every target is PAD; the language-model loss is undefined")

    log_probs = log_softmax(batch.logits)
    rows = np.flatnonzero(mask)
    targets = batch.targets[rows]
    loss = float(-log_probs[rows, targets].sum() / n_real)

    grad = np.zeros_like(batch.logits)
    grad[rows] = np.exp(log_probs[rows])
    grad[rows, targets] -= 1.0
    grad /= n_real
    return loss, grad
