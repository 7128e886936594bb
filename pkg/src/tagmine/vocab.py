"""
Tag category system: frequency counting, top-K selection, synonym folding, typing,
corpus statistics and overlap with external category lists.

Frequencies are counted once per caption and merge by addition, so counting can be
split over any number of shard files; vocabulary construction is then a single
deterministic reduction over the merged counts.
"""

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, Field

from .corpus import parallel_map
from .errors import DataError, PreconditionError
from .jsonl import iter_lines, read_models, write_tsv
from .models import TAG_TYPE_PRIORITY, CaptionRecord, ParsedCaption, ParsedTags, TagType
from .semparse import normalize_tag

logger = logging.getLogger(__name__)

VOCAB_HEADER = ("id", "canonical", "type", "frequency", "synonyms")

FrequencyMap = Dict[TagType, Counter]


def empty_frequencies() -> FrequencyMap:
    return {tag_type: Counter() for tag_type in TagType}


def count_frequencies(parsed: Iterable[ParsedTags]) -> FrequencyMap:
    """
    Count tag occurrences per type, once per caption.

    Args:
        parsed: One ParsedTags per caption, already normalized.

    Returns:
        A Counter of tag -> number of captions mentioning it, for each tag type.
    """
    freqs = empty_frequencies()
    for tags in parsed:
        freqs[TagType.ENTITY].update(set(tags.entities))
        freqs[TagType.ATTRIBUTE].update(set(tags.attributes))
        freqs[TagType.ACTION].update(set(tags.actions))
    return freqs


def merge_frequencies(a: FrequencyMap, b: FrequencyMap) -> FrequencyMap:
    """Add two frequency maps; neither input is modified."""
    merged = empty_frequencies()
    for tag_type in TagType:
        merged[tag_type].update(a.get(tag_type, Counter()))
        merged[tag_type].update(b.get(tag_type, Counter()))
    return merged


def count_parsed_file(path: str) -> FrequencyMap:
    """Count the tag frequencies of one `tagmine parse` output file."""
    return count_frequencies(caption.tags for caption in read_models(path, ParsedCaption))


def count_parsed_files(paths: Sequence[str], workers: Optional[int] = None) -> FrequencyMap:
    """Count several parsed files in a worker pool and merge the results in input order."""
    freqs = empty_frequencies()
    for partial in parallel_map(count_parsed_file, list(paths), workers=workers):
        freqs = merge_frequencies(freqs, partial)
    return freqs


def load_synonyms(path: str) -> Dict[str, str]:
    """
    Read a synonym table: one `surface<TAB>canonical` pair per line.

    Both sides are normalized. Blank lines and lines starting with '#' are skipped.
    """
    table: Dict[str, str] = {}
    for number, line in iter_lines(path):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{number}: expected 'surface<TAB>canonical', got {line!r}")
        surface, canonical = normalize_tag(parts[0]), normalize_tag(parts[1])
        if not surface or not canonical:
            raise DataError(f"{path}:{number}: empty surface or canonical form")
        if surface == canonical:
            continue
        if table.get(surface, canonical) != canonical:
            raise DataError(f"{path}:{number}: '{surface}' already maps to '{table[surface]}'")
        table[surface] = canonical
    return table


def resolve_synonyms(table: Mapping[str, str]) -> Dict[str, str]:
    """
    Follow synonym chains to their final canonical (a -> b, b -> c gives a -> c).

    Raises:
        DataError: If the table contains a cycle.
    """
    resolved: Dict[str, str] = {}
    for surface in table:
        chain = [surface]
        current = surface
        while current in table:
            current = table[current]
            if current in chain:
                raise DataError(f"synonym cycle: {' -> '.join(chain + [current])}")
            chain.append(current)
        resolved[surface] = current
    return resolved


def load_allowlist(path: str) -> Tuple[Set[str], Set[str]]:
    """
    Read an allow/deny list: one canonical per line, '-' prefix for a denial.

    Returns:
        (allowed, denied) sets of normalized canonicals.
    """
    allowed: Set[str] = set()
    denied: Set[str] = set()
    for _, line in iter_lines(path):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("-"):
            tag = normalize_tag(line[1:])
            if tag:
                denied.add(tag)
        else:
            tag = normalize_tag(line)
            if tag:
                allowed.add(tag)
    return allowed, denied


@dataclass(frozen=True)
class VocabEntry:
    id: int
    canonical: str
    type: TagType
    frequency: int
    synonyms: FrozenSet[str] = frozenset()


@dataclass
class TagVocabulary:
    """
    A ranked, typed, synonym-merged tag vocabulary.

    Entries are ordered by descending frequency, ties by canonical string, with dense
    ids from 0. `lookup` maps every canonical and synonym to its entry id.
    """

    entries: List[VocabEntry] = field(default_factory=list)
    lookup: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.lookup:
            self.lookup = self._build_lookup()

    def _build_lookup(self) -> Dict[str, int]:
        lookup: Dict[str, int] = {}
        for position, entry in enumerate(self.entries):
            if entry.id != position:
                raise DataError(f"vocabulary ids must be dense from 0; entry {position} has id {entry.id}")
            for surface in (entry.canonical, *sorted(entry.synonyms)):
                if surface in lookup and lookup[surface] != entry.id:
                    raise DataError(f"surface form '{surface}' maps to ids {lookup[surface]} and {entry.id}")
                lookup[surface] = entry.id
        return lookup

    def __len__(self) -> int:
        return len(self.entries)

    def canonical(self, tag_id: int) -> str:
        return self.entries[tag_id].canonical

    def id_of(self, surface: str) -> Optional[int]:
        """Id of a surface form after normalization, or None when it is not in the vocabulary."""
        return self.lookup.get(normalize_tag(surface))

    def resolve(self, tags: ParsedTags) -> List[int]:
        """Sorted vocabulary ids of every tag in a projection; unknown tags are dropped."""
        ids = {self.lookup[tag] for _, tag in tags.typed() if tag in self.lookup}
        return sorted(ids)

    def type_counts(self) -> Dict[TagType, int]:
        """Number of categories of each type."""
        counts = {tag_type: 0 for tag_type in TagType}
        for entry in self.entries:
            counts[entry.type] += 1
        return counts

    def checksum(self) -> str:
        """Short hash of the ordered canonicals, binding models to this vocabulary."""
        digest = hashlib.sha256("\n".join(e.canonical for e in self.entries).encode("utf-8"))
        return digest.hexdigest()[:16]

    def save(self, out: IO[str]):
        """Write the vocabulary as TSV."""
        write_tsv(out, VOCAB_HEADER, (
            (e.id, e.canonical, e.type.value, e.frequency, ",".join(sorted(e.synonyms)))
            for e in self.entries
        ))

    @classmethod
    def load(cls, path: str) -> "TagVocabulary":
        """
        Read a vocabulary TSV written by `save`.

        Raises:
            DataError: On a bad header, malformed row or inconsistent ids.
        """
        entries: List[VocabEntry] = []
        header_seen = False
        for number, line in iter_lines(path):
            if not line.strip():
                continue
            parts = line.split("\t")
            if not header_seen:
                if tuple(parts) != VOCAB_HEADER:
                    raise DataError(f"{path}:{number}: expected header {'/'.join(VOCAB_HEADER)}")
                header_seen = True
                continue
            if len(parts) != len(VOCAB_HEADER):
                raise DataError(f"{path}:{number}: expected {len(VOCAB_HEADER)} columns, got {len(parts)}")
            try:
                entry = VocabEntry(
                    id=int(parts[0]),
                    canonical=parts[1],
                    type=TagType(parts[2]),
                    frequency=int(parts[3]),
                    synonyms=frozenset(s for s in parts[4].split(",") if s),
                )
            except ValueError as e:
                raise DataError(f"{path}:{number}: {e}") from e
            entries.append(entry)
        if not header_seen:
            raise DataError(f"{path}: empty vocabulary file")
        vocab = cls(entries=entries)
        logger.info(f"Loaded vocabulary of {len(vocab)} tags from {path}")
        return vocab


def _majority_type(type_counts: Mapping[TagType, int]) -> TagType:
    return min(type_counts, key=lambda t: (-type_counts[t], TAG_TYPE_PRIORITY[t]))


def build_vocab(
    freqs: FrequencyMap,
    top_k: int,
    synonym_table: Optional[Mapping[str, str]] = None,
    min_freq: int = 1,
    allowlist: Optional[Tuple[Set[str], Set[str]]] = None,
) -> TagVocabulary:
    """
    Build the tag vocabulary from merged frequency maps.

    Args:
        freqs: Per-type tag frequencies.
        top_k: Number of most frequent canonicals kept before the allow/deny list.
        synonym_table: surface -> canonical map; synonym counts fold into the canonical.
        min_freq: Minimum total frequency of a kept canonical.
        allowlist: (allowed, denied) canonicals applied after top-K; when any canonical is
            allowed, only allowed canonicals are kept.

    Returns:
        The TagVocabulary; empty when freqs is empty.

    Raises:
        PreconditionError: If top_k < 1.
        DataError: If the synonym table has a cycle.
    """
    if top_k < 1:
        raise PreconditionError(f"top_k must be >= 1, got {top_k}")
    resolved = resolve_synonyms(synonym_table or {})

    per_type: Dict[str, Counter] = {}
    for tag_type, counter in freqs.items():
        for tag, count in counter.items():
            canonical = resolved.get(tag, tag)
            per_type.setdefault(canonical, Counter())[tag_type] += count

    ranked = sorted(
        ((canonical, sum(counts.values()), _majority_type(counts)) for canonical, counts in per_type.items()),
        key=lambda item: (-item[1], item[0]),
    )
    kept = [item for item in ranked if item[1] >= min_freq][:top_k]

    if allowlist is not None:
        allowed, denied = allowlist
        kept = [item for item in kept if item[0] not in denied and (not allowed or item[0] in allowed)]

    synonyms_of: Dict[str, Set[str]] = {}
    for surface, canonical in resolved.items():
        synonyms_of.setdefault(canonical, set()).add(surface)

    entries = [
        VocabEntry(id=i, canonical=canonical, type=tag_type, frequency=frequency,
                   synonyms=frozenset(synonyms_of.get(canonical, ())))
        for i, (canonical, frequency, tag_type) in enumerate(kept)
    ]
    vocab = TagVocabulary(entries=entries)
    counts = vocab.type_counts()
    logger.info(
        f"Built vocabulary of {len(vocab)} tags from {len(per_type)} canonicals "
        f"({', '.join(f'{t.value}: {counts[t]}' for t in TagType)})"
    )
    return vocab


def vocab_overlap(
    vocab: TagVocabulary, external: Iterable[str], tag_type: Optional[TagType] = None
) -> Tuple[int, List[str]]:
    """
    Categories of an external list that the vocabulary covers.

    Both sides are compared after normalization and synonym resolution.

    Args:
        vocab: The vocabulary.
        external: External category names, in any surface form.
        tag_type: Only count vocabulary entries of this type.

    Returns:
        (number of matched canonicals, matched canonicals in vocabulary order)
    """
    matched: Set[int] = set()
    for name in external:
        tag_id = vocab.id_of(name)
        if tag_id is None:
            continue
        if tag_type is not None and vocab.entries[tag_id].type != tag_type:
            continue
        matched.add(tag_id)
    overlapping = [vocab.canonical(i) for i in sorted(matched)]
    return len(overlapping), overlapping


class CorpusStats(BaseModel):
    """Corpus-level counts, averages rounded to 2 decimals."""
    n_images: int = Field(..., description="Distinct image ids")
    n_texts: int = Field(..., description="Caption records")
    avg_texts_per_image: float
    n_tags: int = Field(..., description="Parsed tag occurrences, counted per caption")
    avg_tags_per_image: float


def corpus_stats(records: Iterable[CaptionRecord], parsed: Iterable[ParsedTags]) -> CorpusStats:
    """
    Table-style corpus statistics.

    Args:
        records: Caption records.
        parsed: The ParsedTags of each record, in the same order.

    Raises:
        DataError: If there are no images or the two streams differ in length.
    """
    images: Set[str] = set()
    n_texts = n_tags = 0
    sentinel = object()
    parsed_iter = iter(parsed)
    for record in records:
        tags = next(parsed_iter, sentinel)
        if tags is sentinel:
            raise DataError("parsed stream is shorter than the record stream")
        images.add(record.image_id)
        n_texts += 1
        n_tags += len(tags)
    if next(parsed_iter, sentinel) is not sentinel:
        raise DataError("parsed stream is longer than the record stream")
    if not images:
        raise DataError("corpus has no images; averages are undefined")

    n_images = len(images)
    return CorpusStats(
        n_images=n_images,
        n_texts=n_texts,
        avg_texts_per_image=round(n_texts / n_images, 2),
        n_tags=n_tags,
        avg_tags_per_image=round(n_tags / n_images, 2),
    )
