"""
Tag-guided retrieval.

Shared tags between a query and a gallery item act as visible alignment indicators:

    score = alpha * cos(query, item) + (1 - alpha) * |query tags & item tags| / max(1, |query tags|)

Results are ranked by descending score, ties by ascending id.
"""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DataError, PreconditionError, ShapeError
from .models import GalleryRecord
from .semparse import parse_caption, project_tags
from .vocab import TagVocabulary

logger = logging.getLogger(__name__)

RankedList = List[Tuple[str, float]]


@dataclass(frozen=True)
class GalleryItem:
    id: str
    embedding: np.ndarray
    tags: FrozenSet[int] = frozenset()

    @classmethod
    def from_record(cls, record: GalleryRecord) -> "GalleryItem":
        return cls(record.id, np.asarray(record.vector, dtype=np.float64), frozenset(record.tags))


@dataclass(frozen=True)
class Query:
    """Query-side embedding (optional) and tag ids."""

    embedding: Optional[np.ndarray] = None
    tags: FrozenSet[int] = field(default_factory=frozenset)


def _unit(vector: np.ndarray, what: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64).reshape(-1)
    norm = np.linalg.norm(vector)
    if norm == 0 or not np.isfinite(norm):
        raise DataError(f"{what} embedding has zero or non-finite norm")
    return vector / norm


class Gallery:
    """
    Dense form of a retrieval gallery: unit-normalized embeddings and a binary tag matrix.

    Args:
        items: Gallery items with unique ids and equal embedding dimensions.
    """

    def __init__(self, items: Sequence[GalleryItem]):
        self.ids: List[str] = [item.id for item in items]
        if len(set(self.ids)) != len(self.ids):
            raise DataError("gallery ids must be unique")
        dims = {np.asarray(item.embedding).size for item in items}
        if len(dims) > 1:
            raise ShapeError(f"gallery embeddings have different dimensions: {sorted(dims)}")
        self.dim = dims.pop() if dims else 0
        self.embeddings = (
            np.stack([_unit(item.embedding, f"gallery item '{item.id}'") for item in items])
            if items else np.zeros((0, 0))
        )
        width = max((max(item.tags) + 1 for item in items if item.tags), default=0)
        self.tag_matrix = np.zeros((len(items), width), dtype=bool)
        for row, item in enumerate(items):
            self.tag_matrix[row, sorted(item.tags)] = True
        # position of each item in ascending id order, the tie-breaker
        self.id_rank = np.empty(len(items), dtype=np.int64)
        self.id_rank[sorted(range(len(items)), key=self.ids.__getitem__)] = np.arange(len(items))

    @classmethod
    def from_records(cls, records: Iterable[GalleryRecord]) -> "Gallery":
        return cls([GalleryItem.from_record(r) for r in records])

    def __len__(self) -> int:
        return len(self.ids)

    def tag_overlap(self, tags: Iterable[int]) -> np.ndarray:
        """Number of the given tags each item carries."""
        columns = sorted(t for t in set(tags) if 0 <= t < self.tag_matrix.shape[1])
        return self.tag_matrix[:, columns].sum(axis=1).astype(np.float64)

    def cosine(self, embedding: np.ndarray) -> np.ndarray:
        query = _unit(embedding, "query")
        if query.size != self.dim:
            raise ShapeError(f"query embedding has {query.size} dims, gallery has {self.dim}")
        return self.embeddings @ query

    def scores(self, query: Query, alpha: float) -> np.ndarray:
        """Combined score of every item for the query."""
        _check_alpha(alpha)
        overlap_frac = self.tag_overlap(query.tags) / max(1, len(query.tags))
        if query.embedding is None:
            if alpha != 0.0:
                raise PreconditionError("a query without an embedding can only be scored with alpha = 0")
            return overlap_frac
        return alpha * self.cosine(query.embedding) + (1.0 - alpha) * overlap_frac

    def top(self, scores: np.ndarray, top_k: int) -> RankedList:
        """The top_k items by descending score, ties by ascending id."""
        if top_k < 1:
            raise PreconditionError(f"top_k must be >= 1, got {top_k}")
        order = np.lexsort((self.id_rank, -scores))[:top_k]
        return [(self.ids[i], float(scores[i])) for i in order]


def _check_alpha(alpha: float):
    if not 0.0 <= alpha <= 1.0:
        raise PreconditionError(f"alpha must lie in [0, 1], got {alpha}")


def _as_gallery(gallery: Union[Gallery, Sequence[GalleryItem]]) -> Gallery:
    return gallery if isinstance(gallery, Gallery) else Gallery(gallery)


def combined_score(query: Query, item: GalleryItem, alpha: float) -> float:
    """
    Blend of cosine similarity and the fraction of query tags the item carries.

    Raises:
        DataError: If either embedding has zero norm.
        ShapeError: If the dimensions differ.
    """
    if query.embedding is None:
        raise PreconditionError("combined_score needs a query embedding")
    return float(Gallery([item]).scores(query, alpha)[0])


def rerank(query: Query, gallery: Union[Gallery, Sequence[GalleryItem]], alpha: float, top_k: int) -> RankedList:
    """
    Rank gallery items by combined score.

    A query without an embedding is ranked on tag overlap alone.

    Args:
        query: Query embedding and tags.
        gallery: The items to rank.
        alpha: Weight of the cosine term, in [0, 1].
        top_k: Number of results, >= 1.

    Returns:
        Up to top_k (id, score) pairs; empty for an empty gallery.
    """
    _check_alpha(alpha)
    if top_k < 1:
        raise PreconditionError(f"top_k must be >= 1, got {top_k}")
    gallery = _as_gallery(gallery)
    if not len(gallery):
        return []
    if query.embedding is None:
        logger.warning("Query has no embedding; ranking by tag overlap only")
        alpha = 0.0
    return gallery.top(gallery.scores(query, alpha), top_k)


def keyword_search(keywords: Iterable[int], gallery: Union[Gallery, Sequence[GalleryItem]], top_k: int) -> RankedList:
    """
    Rank gallery items by the fraction of keywords among their tags.

    Raises:
        PreconditionError: If the keyword set is empty or top_k < 1.
    """
    keywords = set(keywords)
    if not keywords:
        raise PreconditionError("keyword search needs at least one keyword")
    if top_k < 1:
        raise PreconditionError(f"top_k must be >= 1, got {top_k}")
    gallery = _as_gallery(gallery)
    if not len(gallery):
        return []
    return gallery.top(gallery.tag_overlap(keywords) / len(keywords), top_k)


def query_from_text(
    text: str, vocab: TagVocabulary, embedding: Optional[Sequence[float]] = None, mode: str = "builtin"
) -> Query:
    """Build a query whose tags are parsed from text and resolved against the vocabulary."""
    tags = frozenset(vocab.resolve(project_tags(parse_caption(text, mode=mode))))
    vector = None if embedding is None else np.asarray(embedding, dtype=np.float64)
    return Query(embedding=vector, tags=tags)


def keywords_to_ids(keywords: Iterable[str], vocab: TagVocabulary) -> List[int]:
    """Resolve keyword strings (canonicals, synonyms or ids) to vocabulary ids."""
    ids = set()
    for keyword in keywords:
        keyword = keyword.strip()
        if not keyword:
            continue
        if keyword.isdigit() and int(keyword) < len(vocab):
            ids.add(int(keyword))
            continue
        tag_id = vocab.id_of(keyword)
        if tag_id is None:
            logger.warning(f"Keyword '{keyword}' is not in the vocabulary; ignoring it")
            continue
        ids.add(tag_id)
    return sorted(ids)
