"""
Synthetic corpora with known answers.

- Tagging: every tag has an orthonormal prototype vector; an image's features are the
  sum of its tags' prototypes plus Gaussian noise, and its labels are parsed from a
  caption naming those tags.
- Retrieval: every gallery item has a distinct tag set, so a query carrying its item's
  tags has that item as the unique best tag match; query embeddings are noisy copies.
- Captions: template captions over a small lexicon, for vocabulary runs at scale.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .corpus import make_rng
from .errors import PreconditionError
from .models import CaptionRecord, FeatureRecord, ImageTagSet
from .rerank import GalleryItem, Query
from .semparse import parse_caption, project_tags
from .vocab import TagVocabulary, build_vocab, count_frequencies

logger = logging.getLogger(__name__)

# Nouns the builtin parser reads as single entity heads when joined by "and a".
TAG_NOUNS = (
    "dog", "cat", "horse", "bench", "beach", "desk", "kite", "tree", "car", "boat",
    "clock", "lamp", "chair", "table", "bird", "cake", "pizza", "phone", "train", "truck",
    "bottle", "cup", "bowl", "book", "umbrella", "giraffe", "zebra", "elephant", "sheep",
    "surfboard", "laptop", "bicycle", "banana", "sandwich", "couch", "vase", "oven",
    "sink", "toilet", "kitchen", "mountain", "river", "street", "field", "bridge",
    "window", "door", "fence", "flower", "candle",
)


@dataclass
class TaggingCorpus:
    prototypes: np.ndarray
    vocab: TagVocabulary
    train_captions: List[CaptionRecord]
    train_features: List[FeatureRecord]
    train_labels: List[ImageTagSet]
    test_captions: List[CaptionRecord]
    test_features: List[FeatureRecord]
    test_labels: List[ImageTagSet]


def caption_for(tag_names: Sequence[str]) -> str:
    """'a dog and a kite and a bench' for the given tag names."""
    return "a " + " and a ".join(tag_names)


def make_tagging_corpus(
    n_tags: int = 32,
    dim: int = 64,
    sigma: float = 0.1,
    n_train: int = 2000,
    n_test: int = 500,
    seed: int = 0,
    min_tags: int = 1,
    max_tags: int = 4,
) -> TaggingCorpus:
    """
    Feature corpus whose labels come from parsing a caption per image.

    Args:
        n_tags: Number of tags, <= dim and <= the size of the noun list.
        dim: Feature dimension.
        sigma: Standard deviation of the per-dimension feature noise.
        n_train: Training images.
        n_test: Held-out images.
        seed: Seed of every random draw.
        min_tags: Fewest tags per image.
        max_tags: Most tags per image.

    Returns:
        The corpus; the vocabulary is built from the training captions.
    """
    if not 1 <= n_tags <= min(dim, len(TAG_NOUNS)):
        raise PreconditionError(f"n_tags must lie in [1, {min(dim, len(TAG_NOUNS))}], got {n_tags}")
    if not 1 <= min_tags <= max_tags <= n_tags:
        raise PreconditionError(f"need 1 <= min_tags <= max_tags <= n_tags, got {min_tags}, {max_tags}")

    rng = make_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(dim, n_tags)))
    prototypes = q.T.copy()

    captions: List[CaptionRecord] = []
    features: List[FeatureRecord] = []
    for index in range(n_train + n_test):
        k = int(rng.integers(min_tags, max_tags + 1))
        present = sorted(int(t) for t in rng.choice(n_tags, size=k, replace=False))
        image_id = f"img{index:05d}"
        vector = prototypes[present].sum(axis=0) + rng.normal(scale=sigma, size=dim)
        captions.append(CaptionRecord(image_id=image_id, text=caption_for([TAG_NOUNS[t] for t in present])))
        features.append(FeatureRecord(image_id=image_id, vector=vector.tolist()))

    parsed = [project_tags(parse_caption(c.text)) for c in captions]
    vocab = build_vocab(count_frequencies(parsed[:n_train]), top_k=n_tags)
    labels = [ImageTagSet(image_id=c.image_id, tags=vocab.resolve(tags)) for c, tags in zip(captions, parsed)]
    logger.info(f"Synthetic tagging corpus: {n_train} train / {n_test} test images, {len(vocab)} tags, d={dim}")

    return TaggingCorpus(
        prototypes=prototypes,
        vocab=vocab,
        train_captions=captions[:n_train],
        train_features=features[:n_train],
        train_labels=labels[:n_train],
        test_captions=captions[n_train:],
        test_features=features[n_train:],
        test_labels=labels[n_train:],
    )


@dataclass
class RetrievalTask:
    gallery: List[GalleryItem]
    queries: List[Query]
    relevant: List[str]


def make_retrieval_task(
    n_queries: int = 100,
    n_items: int = 1000,
    n_tags: int = 50,
    tags_per_item: int = 3,
    dim: int = 64,
    noise: float = 2.0,
    seed: int = 0,
) -> RetrievalTask:
    """
    Gallery of random unit embeddings with distinct tag sets, and noisy queries.

    Each query targets one item: its embedding is the item's plus noise of expected
    norm `noise`, its tags are the item's own tags.
    """
    if n_queries > n_items:
        raise PreconditionError(f"cannot draw {n_queries} distinct queries from {n_items} items")
    if not 1 <= tags_per_item <= n_tags:
        raise PreconditionError(f"tags_per_item must lie in [1, {n_tags}], got {tags_per_item}")
    n_sets = _n_choose_k(n_tags, tags_per_item)
    if n_sets < n_items:
        raise PreconditionError(f"only {n_sets} distinct tag sets for {n_items} items")

    rng = make_rng(seed)
    tag_sets: List[Tuple[int, ...]] = []
    seen = set()
    while len(tag_sets) < n_items:
        tags = tuple(sorted(int(t) for t in rng.choice(n_tags, size=tags_per_item, replace=False)))
        if tags not in seen:
            seen.add(tags)
            tag_sets.append(tags)

    embeddings = rng.normal(size=(n_items, dim))
    embeddings /= np.linalg.norm(embeddings, axis=1, keepdims=True)
    gallery = [
        GalleryItem(id=f"item{i:05d}", embedding=embeddings[i], tags=frozenset(tag_sets[i]))
        for i in range(n_items)
    ]

    targets = rng.choice(n_items, size=n_queries, replace=False)
    queries = []
    for target in targets:
        vector = embeddings[target] + rng.normal(scale=noise / np.sqrt(dim), size=dim)
        queries.append(Query(embedding=vector, tags=frozenset(tag_sets[target])))
    return RetrievalTask(gallery=gallery, queries=queries, relevant=[gallery[t].id for t in targets])


def _n_choose_k(n: int, k: int) -> int:
    result = 1
    for i in range(k):
        result = result * (n - i) // (i + 1)
    return result


_SUBJECTS = ("dog", "cat", "horse", "bird", "cow", "duck", "boy", "girl", "kite", "boat")
_ADJECTIVES = ("red", "small", "white", "young", "black", "large", "wooden", "old")
_PLACES = ("beach", "street", "field", "table", "bench", "grass", "desk", "river")
_PREPOSITIONS = ("on", "near", "under", "next to", "behind", "in front of")
_VERBS_ING = ("riding", "holding", "eating", "watching", "chasing", "carrying", "playing with")
_OBJECTS = ("ball", "frisbee", "kite", "sandwich", "umbrella", "surfboard", "flag", "bicycle")
_TEMPLATES = (
    "a {adj} {subj} is {prep} the {place}",
    "two {subj}s {verb} a {obj} {prep} the {place}",
    "a {subj} {verb} a {adj} {obj}",
    "the {adj} {subj} and a {obj} {prep} a {place}",
)


def make_caption_corpus(n_captions: int, seed: int = 0, captions_per_image: int = 5) -> List[CaptionRecord]:
    """Template captions, captions_per_image consecutive lines per image."""
    if n_captions < 0 or captions_per_image < 1:
        raise PreconditionError("need n_captions >= 0 and captions_per_image >= 1")
    rng = make_rng(seed)

    def pick(options: Sequence[str]) -> str:
        return options[int(rng.integers(len(options)))]

    records = []
    for index in range(n_captions):
        text = pick(_TEMPLATES).format(
            adj=pick(_ADJECTIVES), subj=pick(_SUBJECTS), prep=pick(_PREPOSITIONS),
            place=pick(_PLACES), verb=pick(_VERBS_ING), obj=pick(_OBJECTS),
        )
        records.append(CaptionRecord(image_id=f"img{index // captions_per_image:06d}", text=text))
    return records
