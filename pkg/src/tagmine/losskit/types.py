"""
Typed numeric batches fed to the loss kernels.

Each type validates and converts on construction, so the kernels can assume float64
arrays of consistent shape.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DataError, PreconditionError, ShapeError

EPS = 1e-8
IGNORE = -1
PAD = -1


def _matrix(values, name: str, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    if array.ndim != 2:
        raise ShapeError(f"{name} must be a 2-d matrix, got shape {array.shape}")
    return array


@dataclass(frozen=True)
class LabelMatrix:
    """B x C labels over {0, 1, IGNORE}."""

    values: np.ndarray

    def __post_init__(self):
        values = _matrix(self.values, "labels", dtype=np.int64)
        if not np.isin(values, (0, 1, IGNORE)).all():
            raise DataError(f"labels must be 0, 1 or {IGNORE}")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    @property
    def mask(self) -> np.ndarray:
        """True where the label is not IGNORE."""
        return self.values != IGNORE

    @classmethod
    def from_tag_sets(cls, tag_sets: Sequence[Sequence[int]], n_categories: int) -> "LabelMatrix":
        """Dense 0/1 labels from per-image tag id lists."""
        values = np.zeros((len(tag_sets), n_categories), dtype=np.int64)
        for row, tags in enumerate(tag_sets):
            values[row, list(tags)] = 1
        return cls(values)


@dataclass(frozen=True)
class ProbMatrix:
    """B x C probabilities, clamped to [EPS, 1 - EPS] on construction."""

    values: np.ndarray

    def __post_init__(self):
        values = _matrix(self.values, "probabilities")
        if not np.isfinite(values).all():
            raise DataError("probabilities must be finite")
        object.__setattr__(self, "values", np.clip(values, EPS, 1.0 - EPS))

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class FocusParams:
    """Asymmetric focusing exponents for positives and negatives."""

    gamma_pos: float = 0.0
    gamma_neg: float = 4.0

    def __post_init__(self):
        if self.gamma_pos < 0 or self.gamma_neg < 0:
            raise PreconditionError(
                f"focusing exponents must be >= 0, got gamma_pos={self.gamma_pos}, gamma_neg={self.gamma_neg}"
            )


@dataclass(frozen=True)
class TokenBatch:
    """N x V next-token logits with N target ids; targets equal to pad_id are skipped."""

    logits: np.ndarray
    targets: np.ndarray
    pad_id: int = PAD

    def __post_init__(self):
        logits = _matrix(self.logits, "logits")
        targets = np.array(self.targets, dtype=np.int64).reshape(-1)
        if targets.shape[0] != logits.shape[0]:
            raise ShapeError(f"{targets.shape[0]} targets for {logits.shape[0]} logit rows")
        vocab_size = logits.shape[1]
        real = targets != self.pad_id
        if ((targets[real] < 0) | (targets[real] >= vocab_size)).any():
            raise DataError(f"target ids must lie in [0, {vocab_size}) or equal the pad id {self.pad_id}")
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "targets", targets)

    @property
    def mask(self) -> np.ndarray:
        """True at non-PAD positions."""
        return self.targets != self.pad_id


@dataclass(frozen=True)
class EmbeddingBatch:
    """Matched image and text embeddings (row i of each is a positive pair) and a temperature."""

    image: np.ndarray
    text: np.ndarray
    temperature: float = 0.07

    def __post_init__(self):
        image = _matrix(self.image, "image embeddings")
        text = _matrix(self.text, "text embeddings")
        if image.shape != text.shape:
            raise ShapeError(f"image embeddings {image.shape} and text embeddings {text.shape} differ")
        if self.temperature <= 0:
            raise PreconditionError(f"temperature must be > 0, got {self.temperature}")
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "text", text)

    @property
    def size(self) -> int:
        return self.image.shape[0]
