"""
Corpus streaming, sharding and per-image tag aggregation.

Shards are a modular partition of line numbers, so any number of workers can stream
the same file and the union of their outputs is the unsharded stream. Per-image tag
sets merge by set union, which is associative and commutative, so partial
aggregations from different shards can be combined in any order.

Blank or whitespace-only lines carry no record: streaming skips them without a
RecordError, as every other JSON-lines reader in tagmine does. They still count
toward line numbers and shard assignment.
"""

import logging
import multiprocessing
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, TypeVar, Union

import numpy as np
from pydantic import ValidationError

from .config import worker_count
from .errors import PreconditionError
from .jsonl import describe_validation_error, iter_lines
from .models import CaptionRecord, ImageTagSet, RecordError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

Shard = Tuple[int, int]
StreamItem = Tuple[int, Union[CaptionRecord, RecordError]]
PartialAggregate = Dict[str, Set[int]]


def check_shard(shard: Shard) -> Shard:
    """Validate a (index, count) shard spec."""
    index, count = shard
    if count < 1:
        raise PreconditionError(f"shard count must be >= 1, got {count}")
    if not 0 <= index < count:
        raise PreconditionError(f"shard index {index} out of range for {count} shards")
    return index, count


def parse_shard_spec(spec: str) -> Shard:
    """Parse an 'I/N' shard spec, e.g. '0/8'."""
    try:
        index_text, count_text = spec.split("/")
        shard = int(index_text), int(count_text)
    except ValueError:
        raise PreconditionError(f"shard spec must look like I/N, got {spec!r}") from None
    return check_shard(shard)


def stream_records(path: str, shard: Shard = (0, 1)) -> Iterator[StreamItem]:
    """
    Stream the caption records of one shard of a JSON-lines corpus file.

    Args:
        path: UTF-8 JSON-lines file, one {"image_id", "text"} object per line
        shard: (index, count); only lines with line_number % count == index are read

    Yields:
        (line number, CaptionRecord) for good lines and (line number, RecordError) for
        malformed ones, in file order. Blank lines are skipped.

    Raises:
        PreconditionError: If the shard spec is invalid.
        DataError: If the file cannot be read.
    """
    index, count = check_shard(shard)
    n_good = n_bad = 0
    for number, line in iter_lines(path):
        if number % count != index or not line.strip():
            continue
        try:
            record = CaptionRecord.model_validate_json(line)
        except ValidationError as e:
            n_bad += 1
            message = describe_validation_error(e)
            logger.warning(f"{path}:{number}: skipping malformed record ({message})")
            yield number, RecordError(line=number, message=message)
            continue
        n_good += 1
        yield number, record
    logger.info(f"Streamed {n_good} records ({n_bad} malformed) from {path} shard {index}/{count}")


def partial_aggregate(parsed: Iterable[Tuple[str, Iterable[int]]]) -> PartialAggregate:
    """Union tag ids per image over one slice of the parsed stream."""
    partial: PartialAggregate = {}
    for image_id, tags in parsed:
        partial.setdefault(image_id, set()).update(tags)
    return partial


def merge_tag_sets(a: PartialAggregate, b: PartialAggregate) -> PartialAggregate:
    """Merge two partial aggregations by per-image set union; neither input is modified."""
    merged = {image_id: set(tags) for image_id, tags in a.items()}
    for image_id, tags in b.items():
        merged.setdefault(image_id, set()).update(tags)
    return merged


def finalize_aggregate(partial: PartialAggregate) -> List[ImageTagSet]:
    return [ImageTagSet(image_id=image_id, tags=sorted(tags)) for image_id, tags in sorted(partial.items())]


def aggregate_image_tags(parsed: Iterable[Tuple[str, Iterable[int]]]) -> List[ImageTagSet]:
    """
    Union the tag sets of every caption of each image.

    Args:
        parsed: (image_id, tag ids) pairs, one per caption, in any order

    Returns:
        One ImageTagSet per distinct image_id, ordered by image_id.
    """
    return finalize_aggregate(partial_aggregate(parsed))


def make_rng(seed: int) -> np.random.Generator:
    """The project-wide PRNG: numpy's PCG64 seeded through SeedSequence(seed)."""
    return np.random.Generator(np.random.PCG64(seed))


def shuffle_tags(tags: Sequence[T], seed: int) -> List[T]:
    """Fisher-Yates shuffle of a tag list, reproducible for a fixed seed."""
    out = list(tags)
    rng = make_rng(seed)
    for i in range(len(out) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        out[i], out[j] = out[j], out[i]
    return out


def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    Apply func to every item, in a process pool when more than one worker is available.

    Results come back in input order, so reductions over them are independent of the
    worker count. func must be a picklable module-level function.
    """
    workers = worker_count() if workers is None else workers
    workers = max(1, min(workers, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    logger.debug(f"Mapping {len(items)} items over {workers} workers")
    with multiprocessing.Pool(processes=workers) as pool:
        return pool.map(func, items)
