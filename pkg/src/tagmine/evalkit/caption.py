import logging
from typing import Dict, Iterable, Optional, Sequence, Set, Tuple, Union

import numpy as np

from ..models import CaptionRecord, ImageTagSet
from ..semparse import parse_caption, project_tags
from ..vocab import TagVocabulary
from .metrics import PRFReport, check_tag_ids, prf_from_binary

logger = logging.getLogger(__name__)

Caption = Union[CaptionRecord, Tuple[str, str]]


def caption_tag_sets(
    captions: Iterable[Caption], vocab: TagVocabulary, mode: str = "builtin", sidecar: Optional[str] = None
) -> Dict[str, Set[int]]:
    """Parse each caption and union its vocabulary tag ids per image."""
    tag_sets: Dict[str, Set[int]] = {}
    for line, caption in enumerate(captions):
        image_id, text = (caption.image_id, caption.text) if isinstance(caption, CaptionRecord) else caption
        tags = project_tags(parse_caption(text, mode=mode, sidecar=sidecar, line=line))
        tag_sets.setdefault(image_id, set()).update(vocab.resolve(tags))
    return tag_sets


def eval_caption_as_tagger(
    captions: Iterable[Caption],
    truth: Sequence[ImageTagSet],
    vocab: TagVocabulary,
    mode: str = "builtin",
    sidecar: Optional[str] = None,
    categories: Optional[Iterable[int]] = None,
) -> PRFReport:
    """
    Score captions as tag predictions.

    Every caption is parsed, projected onto tags and resolved to vocabulary ids through
    canonicals and synonyms; the per-image union is compared with the ground truth as
    binary predictions. Images with no caption predict nothing.

    Args:
        captions: CaptionRecords or (image_id, text) pairs.
        truth: Ground-truth tag sets; they define the evaluated images.
        vocab: Vocabulary the truth ids refer to.
        mode: Parser mode; external parses are keyed by caption position.
        sidecar: Sidecar file for the external mode.
        categories: Optional category id subset.

    Returns:
        Micro and macro precision/recall/F1.
    """
    predicted_sets = caption_tag_sets(captions, vocab, mode=mode, sidecar=sidecar)
    n_categories = len(vocab)
    predicted = np.zeros((len(truth), n_categories), dtype=bool)
    labels = np.zeros((len(truth), n_categories), dtype=bool)
    for row, tag_set in enumerate(truth):
        predicted[row, sorted(predicted_sets.get(tag_set.image_id, ()))] = True
        labels[row, check_tag_ids(tag_set.tags, n_categories, tag_set.image_id)] = True
    missing = sum(1 for t in truth if t.image_id not in predicted_sets)
    if missing:
        logger.warning(f"{missing} ground-truth images have no caption")
    return prf_from_binary(predicted, labels, categories)
