"""
Linear multi-label tagger trained with the asymmetric loss.

A desk-scale stand-in for a recognition head: probabilities are sigmoid(W x + b),
the objective is asl_loss over them, and inference thresholds the probabilities.
"""

import logging
import math
import sys
from dataclasses import dataclass
from typing import IO, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .corpus import make_rng
from .errors import DataError, PreconditionError, ShapeError
from .jsonl import iter_lines
from .losskit import FocusParams, LabelMatrix, ProbMatrix, asl_loss
from .models import FeatureRecord, ImageTagSet
from .vocab import TagVocabulary

logger = logging.getLogger(__name__)


@dataclass
class LinearTagger:
    """C x d weights, length-C bias, and the checksum of the vocabulary they score."""

    weights: np.ndarray
    bias: np.ndarray
    vocab_hash: str

    @property
    def n_categories(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def init_tagger(n_categories: int, dim: int, seed: int, vocab_hash: str = "") -> LinearTagger:
    """Seeded initialization: weights ~ U(-1/sqrt(d), 1/sqrt(d)), bias 0."""
    return _init_from(make_rng(seed), n_categories, dim, vocab_hash)


def _init_from(rng: np.random.Generator, n_categories: int, dim: int, vocab_hash: str) -> LinearTagger:
    if n_categories < 1 or dim < 1:
        raise PreconditionError(f"tagger needs C >= 1 and d >= 1, got C={n_categories}, d={dim}")
    bound = 1.0 / math.sqrt(dim)
    weights = rng.uniform(-bound, bound, size=(n_categories, dim))
    return LinearTagger(weights=weights, bias=np.zeros(n_categories), vocab_hash=vocab_hash)


def stack_features(records: Sequence[FeatureRecord]) -> Tuple[List[str], np.ndarray]:
    """
    Stack feature records into an n x d matrix.

    Raises:
        DataError: If the vectors differ in length.
    """
    if not records:
        return [], np.zeros((0, 0))
    dim = len(records[0].vector)
    for record in records:
        if len(record.vector) != dim:
            raise DataError(f"feature '{record.image_id}' has {len(record.vector)} dims, expected {dim}")
    return [r.image_id for r in records], np.array([r.vector for r in records], dtype=np.float64)


def predict_batch(model: LinearTagger, features: np.ndarray) -> np.ndarray:
    """n x C probabilities for an n x d feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.dim:
        raise ShapeError(f"features of shape {features.shape} do not match model dimension {model.dim}")
    return sigmoid(features @ model.weights.T + model.bias)


def predict_logits(model: LinearTagger, features) -> np.ndarray:
    """
    Tag probabilities sigmoid(W x + b) for one image.

    Args:
        model: The tagger.
        features: A FeatureRecord or a length-d vector.

    Returns:
        Length-C probabilities in (0, 1).
    """
    vector = features.vector if isinstance(features, FeatureRecord) else features
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1:
        raise ShapeError(f"expected a feature vector, got shape {vector.shape}")
    return predict_batch(model, vector[None, :])[0]


def threshold_tags(probs: Sequence[float], threshold: float) -> List[int]:
    """Sorted ids whose probability is strictly above the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise PreconditionError(f"threshold must lie in [0, 1], got {threshold}")
    return [int(i) for i in np.flatnonzero(np.asarray(probs) > threshold)]


def loss_and_gradients(
    model: LinearTagger, features: np.ndarray, labels: LabelMatrix, focus: FocusParams
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    ASL objective of the model on a batch, with gradients for weights and bias.

    The probability gradient from asl_loss is chained through the sigmoid and the
    linear map.

    Returns:
        (loss, C x d weight gradient, length-C bias gradient)
    """
    logits = features @ model.weights.T + model.bias
    probs = sigmoid(logits)
    loss, grad_probs = asl_loss(labels, ProbMatrix(probs), focus)
    grad_logits = grad_probs * probs * (1.0 - probs)
    return loss, grad_logits.T @ features, grad_logits.sum(axis=0)


def join_training_data(
    features: Sequence[FeatureRecord], labels: Sequence[ImageTagSet], n_categories: int
) -> Tuple[np.ndarray, LabelMatrix]:
    """
    Pair every labelled image with its feature vector.

    Raises:
        DataError: On a labelled image without features, a tag id outside the
            vocabulary, inconsistent feature dimensions or an empty training set.
    """
    by_id: Dict[str, FeatureRecord] = {}
    for record in features:
        by_id[record.image_id] = record
    ordered = []
    for tag_set in labels:
        if tag_set.image_id not in by_id:
            raise DataError(f"no features for labelled image '{tag_set.image_id}'")
        bad = [t for t in tag_set.tags if t >= n_categories]
        if bad:
            raise DataError(f"image '{tag_set.image_id}' has tag id {bad[0]} outside a vocabulary of {n_categories}")
        ordered.append(by_id[tag_set.image_id])
    if not ordered:
        raise DataError("no labelled images to train on")
    unused = len(by_id) - len({t.image_id for t in labels})
    if unused > 0:
        logger.warning(f"Ignoring {unused} feature records without labels")

    _, matrix = stack_features(ordered)
    return matrix, LabelMatrix.from_tag_sets([t.tags for t in labels], n_categories)


def train_with_history(
    features: Sequence[FeatureRecord],
    labels: Sequence[ImageTagSet],
    vocab: TagVocabulary,
    focus: FocusParams = FocusParams(gamma_pos=0.0, gamma_neg=4.0),
    lr: float = 0.5,
    epochs: int = 20,
    seed: int = 0,
    batch_size: int = 32,
) -> Tuple[LinearTagger, List[float]]:
    """
    Train a tagger with minibatch SGD and return it with the full-data loss after each epoch.

    Args:
        features: Feature records; only labelled images are used.
        labels: Per-image tag sets over the vocabulary.
        vocab: The vocabulary the tag ids refer to.
        focus: ASL focusing exponents.
        lr: Learning rate, > 0.
        epochs: Number of passes, >= 0.
        seed: Seeds both the initialization and the minibatch order.
        batch_size: Minibatch size, >= 1.

    Returns:
        (model, per-epoch training losses)
    """
    if lr <= 0:
        raise PreconditionError(f"learning rate must be > 0, got {lr}")
    if epochs < 0:
        raise PreconditionError(f"epochs must be >= 0, got {epochs}")
    if batch_size < 1:
        raise PreconditionError(f"batch size must be >= 1, got {batch_size}")

    n_categories = len(vocab)
    matrix, label_matrix = join_training_data(features, labels, n_categories)
    n_images, dim = matrix.shape
    rng = make_rng(seed)
    model = _init_from(rng, n_categories, dim, vocab.checksum())
    logger.info(f"Training {n_categories}x{dim} tagger on {n_images} images for {epochs} epochs")

    history: List[float] = []
    for epoch in tqdm(range(epochs), desc="train", disable=not sys.stderr.isatty()):
        order = rng.permutation(n_images)
        for start in range(0, n_images, batch_size):
            rows = order[start:start + batch_size]
            _, grad_w, grad_b = loss_and_gradients(model, matrix[rows], LabelMatrix(label_matrix.values[rows]), focus)
            model.weights -= lr * grad_w
            model.bias -= lr * grad_b
        loss, _, _ = loss_and_gradients(model, matrix, label_matrix, focus)
        history.append(loss)
        logger.info(f"epoch {epoch + 1}/{epochs}: loss {loss:.6f}")
    return model, history


def train(
    features: Sequence[FeatureRecord],
    labels: Sequence[ImageTagSet],
    vocab: TagVocabulary,
    focus: FocusParams = FocusParams(gamma_pos=0.0, gamma_neg=4.0),
    lr: float = 0.5,
    epochs: int = 20,
    seed: int = 0,
    batch_size: int = 32,
) -> LinearTagger:
    """Train a tagger; see train_with_history."""
    model, _ = train_with_history(features, labels, vocab, focus, lr, epochs, seed, batch_size)
    return model


def save_model(model: LinearTagger, out: IO[str]):
    """Write the model as TSV: a C/d/vocab_hash header, then bias and weights per class."""
    out.write("C\td\tvocab_hash\n")
    out.write(f"{model.n_categories}\t{model.dim}\t{model.vocab_hash}\n")
    for bias, row in zip(model.bias, model.weights):
        out.write("\t".join(repr(float(v)) for v in (bias, *row)))
        out.write("\n")


def load_model(path: str) -> LinearTagger:
    """
    Read a model written by save_model.

    Raises:
        DataError: On a malformed or inconsistent file.
    """
    lines = [line for _, line in iter_lines(path) if line.strip()]
    if len(lines) < 2 or lines[0].split("\t") != ["C", "d", "vocab_hash"]:
        raise DataError(f"{path}: not a tagger model file")
    try:
        header = lines[1].split("\t")
        n_categories, dim = int(header[0]), int(header[1])
        vocab_hash = header[2] if len(header) > 2 else ""
        rows = np.array([[float(v) for v in line.split("\t")] for line in lines[2:]], dtype=np.float64)
    except (ValueError, IndexError) as e:
        raise DataError(f"{path}: malformed model file: {e}") from e
    if rows.shape != (n_categories, dim + 1):
        raise DataError(f"{path}: expected {n_categories} rows of {dim + 1} values, got shape {rows.shape}")
    if not np.isfinite(rows).all():
        raise DataError(f"{path}: model has non-finite entries")
    return LinearTagger(weights=rows[:, 1:].copy(), bias=rows[:, 0].copy(), vocab_hash=vocab_hash)


def check_vocab(model: LinearTagger, vocab: Optional[TagVocabulary]):
    """Raise DataError if the model was not trained on this vocabulary."""
    if vocab is None:
        return
    if model.n_categories != len(vocab) or (model.vocab_hash and model.vocab_hash != vocab.checksum()):
        raise DataError(
            f"model ({model.n_categories} tags, hash {model.vocab_hash or '-'}) does not match "
            f"vocabulary ({len(vocab)} tags, hash {vocab.checksum()})"
        )
