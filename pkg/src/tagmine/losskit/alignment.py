"""
Image-text alignment objectives: the symmetric contrastive loss over a cosine
similarity matrix, binary image-text matching, and similarity-weighted hard-negative
sampling for the matching head.
"""

from typing import Tuple

import numpy as np

from ..corpus import make_rng
from ..errors import DataError, PreconditionError, ShapeError
from .sequence import log_softmax
from .types import EPS, EmbeddingBatch


def _row_normalize(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if (norms == 0).any():
        raise DataError("embedding rows must have non-zero norm")
    return x / norms, norms


def _normalize_backward(unit: np.ndarray, norms: np.ndarray, grad_unit: np.ndarray) -> np.ndarray:
    # d(x/|x|) applied to g is (g - u (u . g)) / |x|
    return (grad_unit - unit * (unit * grad_unit).sum(axis=1, keepdims=True)) / norms


def itc_loss(batch: EmbeddingBatch) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Symmetric image-text contrastive loss with diagonal targets.

    S = normalize(I) normalize(T)^T / temperature; the loss is half the sum of the row
    cross-entropy (image -> text) and the column cross-entropy (text -> image), each
    averaged over the batch.

    Returns:
        (loss, gradient w.r.t. the image matrix, gradient w.r.t. the text matrix)

    Raises:
        PreconditionError: If the batch is empty.
        DataError: If an embedding row is all zeros.
    """
    size = batch.size
    if size == 0:
        raise PreconditionError("contrastive loss needs at least one pair")
    tau = float(batch.temperature)

    u, u_norms = _row_normalize(batch.image)
    v, v_norms = _row_normalize(batch.text)
    sim = u @ v.T / tau

    log_rows = log_softmax(sim, axis=1)
    log_cols = log_softmax(sim, axis=0)
    diagonal = np.arange(size)
    # + 0.0 turns the -0.0 of a single pair into 0.0
    loss = 0.5 * (-log_rows[diagonal, diagonal].mean() - log_cols[diagonal, diagonal].mean()) + 0.0

    eye = np.eye(size)
    grad_sim = 0.5 / size * ((np.exp(log_rows) - eye) + (np.exp(log_cols) - eye))
    grad_u = grad_sim @ v / tau
    grad_v = grad_sim.T @ u / tau
    return (
        float(loss),
        _normalize_backward(u, u_norms, grad_u),
        _normalize_backward(v, v_norms, grad_v),
    )


def itm_loss(match_probs: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Image-text matching loss: mean binary cross-entropy over M candidate pairs.

    Args:
        match_probs: Length-M matched probabilities, clamped to [EPS, 1 - EPS].
        labels: Length-M 0/1 labels.

    Returns:
        (loss, length-M gradient w.r.t. match_probs)
    """
    p = np.clip(np.asarray(match_probs, dtype=np.float64).reshape(-1), EPS, 1.0 - EPS)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise ShapeError(f"{p.shape[0]} probabilities for {y.shape[0]} labels")
    if p.shape[0] == 0:
        raise PreconditionError("matching loss needs at least one pair")
    if not np.isin(y, (0.0, 1.0)).all():
        raise DataError("matching labels must be 0 or 1")

    m = p.shape[0]
    loss = float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).sum() / m)
    grad = (-y / p + (1.0 - y) / (1.0 - p)) / m
    return loss, grad


def negative_probabilities(similarity_row: np.ndarray, anchor: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sampling distribution over the non-anchor candidates of one similarity row.

    Returns:
        (candidate indices, softmax probabilities over their similarities)
    """
    row = np.asarray(similarity_row, dtype=np.float64).reshape(-1)
    if row.shape[0] < 2:
        raise PreconditionError(f"hard-negative sampling needs at least 2 candidates, got {row.shape[0]}")
    if not 0 <= anchor < row.shape[0]:
        raise PreconditionError(f"anchor {anchor} out of range for {row.shape[0]} candidates")
    candidates = np.delete(np.arange(row.shape[0]), anchor)
    logits = row[candidates]
    weights = np.exp(logits - logits.max())
    return candidates, weights / weights.sum()


def hard_negative_sample(similarity_row: np.ndarray, anchor: int, seed: int) -> int:
    """
    Draw a negative for the anchor, more similar candidates being more likely.

    Args:
        similarity_row: Length-B similarities of the anchor to every candidate.
        anchor: Index of the positive candidate, never returned.
        seed: PRNG seed; the draw is deterministic given it.

    Returns:
        The index of the sampled negative.
    """
    candidates, probs = negative_probabilities(similarity_row, anchor)
    return int(make_rng(seed).choice(candidates, p=probs))


def mine_hard_negatives(similarity: np.ndarray, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    One hard negative per positive pair in both directions of a B x B similarity matrix.

    Returns:
        (negative text index for each image, negative image index for each text)
    """
    sim = np.asarray(similarity, dtype=np.float64)
    if sim.ndim != 2 or sim.shape[0] != sim.shape[1]:
        raise ShapeError(f"similarity must be a square matrix, got shape {sim.shape}")
    rng = make_rng(seed)
    size = sim.shape[0]
    text_negatives = np.empty(size, dtype=np.int64)
    image_negatives = np.empty(size, dtype=np.int64)
    for i in range(size):
        candidates, probs = negative_probabilities(sim[i], i)
        text_negatives[i] = rng.choice(candidates, p=probs)
    for j in range(size):
        candidates, probs = negative_probabilities(sim[:, j], j)
        image_negatives[j] = rng.choice(candidates, p=probs)
    return text_negatives, image_negatives
