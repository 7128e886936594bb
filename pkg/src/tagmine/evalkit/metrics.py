"""
Tagging metrics: average precision, mAP, thresholded precision/recall/F1 and
threshold sweeps.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DataError, PreconditionError, ShapeError
from ..models import ImageTagSet, PredictionRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoredPredictions:
    """Per-image score vectors with their ground truth, as n x C matrices."""

    image_ids: Tuple[str, ...]
    scores: np.ndarray
    truth: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        truth = np.asarray(self.truth, dtype=bool)
        if scores.ndim != 2 or scores.shape != truth.shape:
            raise ShapeError(f"scores {scores.shape} and truth {truth.shape} must be matching n x C matrices")
        if len(self.image_ids) != scores.shape[0]:
            raise ShapeError(f"{len(self.image_ids)} image ids for {scores.shape[0]} score rows")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "image_ids", tuple(self.image_ids))

    @property
    def n_categories(self) -> int:
        return self.scores.shape[1]

    @classmethod
    def from_records(
        cls, predictions: Iterable[PredictionRecord], truth: Iterable[ImageTagSet], n_categories: Optional[int] = None
    ) -> "ScoredPredictions":
        """
        Join predictions with truth on image_id; the truth file defines the evaluated images.

        Binary predictions ("tags") become 0/1 scores.

        Raises:
            DataError: On a truth image without a prediction, inconsistent score lengths
                or ids outside the category range.
        """
        by_id: Dict[str, PredictionRecord] = {p.image_id: p for p in predictions}
        truth = list(truth)
        if n_categories is None:
            lengths = {len(p.scores) for p in by_id.values() if p.scores is not None}
            if len(lengths) > 1:
                raise DataError(f"score vectors have different lengths: {sorted(lengths)}")
            if lengths:
                n_categories = lengths.pop()
            else:
                all_ids = [t for p in by_id.values() for t in p.tags] + [t for s in truth for t in s.tags]
                n_categories = max(all_ids, default=-1) + 1

        scores = np.zeros((len(truth), n_categories))
        labels = np.zeros((len(truth), n_categories), dtype=bool)
        for row, tag_set in enumerate(truth):
            prediction = by_id.get(tag_set.image_id)
            if prediction is None:
                raise DataError(f"no prediction for image '{tag_set.image_id}'")
            if prediction.scores is not None:
                if len(prediction.scores) != n_categories:
                    raise DataError(
                        f"image '{tag_set.image_id}' has {len(prediction.scores)} scores, expected {n_categories}"
                    )
                scores[row] = prediction.scores
            else:
                scores[row, check_tag_ids(prediction.tags, n_categories, tag_set.image_id)] = 1.0
            labels[row, check_tag_ids(tag_set.tags, n_categories, tag_set.image_id)] = True
        extra = len(set(by_id) - {t.image_id for t in truth})
        if extra:
            logger.warning(f"Ignoring {extra} predictions without ground truth")
        return cls(tuple(t.image_id for t in truth), scores, labels)


def check_tag_ids(ids: Sequence[int], n_categories: int, image_id: str) -> List[int]:
    bad = [i for i in ids if not 0 <= i < n_categories]
    if bad:
        raise DataError(f"image '{image_id}' has tag id {bad[0]} outside {n_categories} categories")
    return list(ids)


def _category_ids(n_categories: int, categories: Optional[Iterable[int]]) -> List[int]:
    if categories is None:
        return list(range(n_categories))
    selected = sorted(set(categories))
    bad = [c for c in selected if not 0 <= c < n_categories]
    if bad:
        raise PreconditionError(f"category id {bad[0]} outside {n_categories} categories")
    return selected


def average_precision(scores: Sequence[float], truth: Sequence[bool]) -> Optional[float]:
    """
    Non-interpolated average precision of one category.

    Images are ranked by descending score, ties by ascending image index; AP is the
    mean of precision@k over the ranks k of the positives.

    Returns:
        AP in [0, 1], or None when the category has no positives.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    if scores.shape != truth.shape:
        raise ShapeError(f"{scores.shape[0]} scores for {truth.shape[0]} truth values")
    n_positive = int(truth.sum())
    if n_positive == 0:
        return None
    order = np.argsort(-scores, kind="stable")
    hits = truth[order]
    ranks = np.flatnonzero(hits) + 1
    precisions = np.cumsum(hits)[ranks - 1] / ranks
    return math.fsum(precisions.tolist()) / n_positive


def per_category_ap(preds: ScoredPredictions, categories: Optional[Iterable[int]] = None) -> List[Tuple[int, Optional[float]]]:
    """(category id, AP or None for categories without positives) for each selected category."""
    return [
        (c, average_precision(preds.scores[:, c], preds.truth[:, c]))
        for c in _category_ids(preds.n_categories, categories)
    ]


def mean_ap(preds: ScoredPredictions, categories: Optional[Iterable[int]] = None) -> float:
    """
    Unweighted mean AP over the categories with at least one positive.

    Raises:
        DataError: If no selected category has a positive.
    """
    defined = [ap for _, ap in per_category_ap(preds, categories) if ap is not None]
    if not defined:
        raise DataError("no category has a positive image; mAP is undefined")
    return math.fsum(defined) / len(defined)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class PRFReport:
    micro: PRF
    macro: PRF


def _ratio(num: float, den: float) -> float:
    return float(num / den) if den > 0 else 0.0


def _f1(precision: float, recall: float) -> float:
    return _ratio(2.0 * precision * recall, precision + recall)


def prf_from_binary(
    predicted: np.ndarray, truth: np.ndarray, categories: Optional[Iterable[int]] = None
) -> PRFReport:
    """
    Micro and macro precision/recall/F1 of binary predictions.

    Micro pools TP/FP/FN over all (image, category) cells. Macro averages per-category
    precision and recall over categories with at least one positive (precision is 0 for
    such a category with no predictions) and takes F1 of the averaged values.
    """
    predicted = np.asarray(predicted, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if predicted.shape != truth.shape:
        raise ShapeError(f"predictions {predicted.shape} and truth {truth.shape} differ")
    selected = _category_ids(truth.shape[1], categories)
    predicted = predicted[:, selected]
    truth = truth[:, selected]

    tp = (predicted & truth).sum(axis=0)
    fp = (predicted & ~truth).sum(axis=0)
    fn = (~predicted & truth).sum(axis=0)

    micro_p = _ratio(tp.sum(), tp.sum() + fp.sum())
    micro_r = _ratio(tp.sum(), tp.sum() + fn.sum())

    has_positive = (tp + fn) > 0
    if has_positive.any():
        per_p = [_ratio(tp[c], tp[c] + fp[c]) for c in np.flatnonzero(has_positive)]
        per_r = [_ratio(tp[c], tp[c] + fn[c]) for c in np.flatnonzero(has_positive)]
        macro_p = math.fsum(per_p) / len(per_p)
        macro_r = math.fsum(per_r) / len(per_r)
    else:
        macro_p = macro_r = 0.0

    return PRFReport(
        micro=PRF(micro_p, micro_r, _f1(micro_p, micro_r)),
        macro=PRF(macro_p, macro_r, _f1(macro_p, macro_r)),
    )


def prf_at_threshold(
    preds: ScoredPredictions, threshold: float, categories: Optional[Iterable[int]] = None
) -> PRFReport:
    """Precision/recall/F1 of predicting every tag whose score exceeds the threshold."""
    return prf_from_binary(preds.scores > threshold, preds.truth, categories)


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    precision: float
    recall: float
    f1: float
    n_predicted: int


def threshold_sweep(
    preds: ScoredPredictions, grid: Sequence[float], categories: Optional[Iterable[int]] = None
) -> List[SweepRow]:
    """
    Micro precision/recall/F1 and the number of predicted tags at each threshold.

    Raises:
        PreconditionError: If the grid is empty or not strictly increasing.
    """
    grid = [float(t) for t in grid]
    if not grid:
        raise PreconditionError("threshold grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise PreconditionError(f"threshold grid must be strictly increasing, got {grid}")
    selected = _category_ids(preds.n_categories, categories)
    rows = []
    for threshold in grid:
        micro = prf_at_threshold(preds, threshold, selected).micro
        n_predicted = int((preds.scores[:, selected] > threshold).sum())
        rows.append(SweepRow(threshold, micro.precision, micro.recall, micro.f1, n_predicted))
    return rows


def parse_grid(spec: str) -> List[float]:
    """
    Expand 'START:STOP:STEP' into an inclusive, strictly increasing threshold list.

    '0.1:0.9:0.1' gives 0.1, 0.2, ..., 0.9.
    """
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise PreconditionError(f"sweep must look like START:STOP:STEP, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise PreconditionError(f"sweep needs STEP > 0 and START <= STOP, got {spec!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]
