from typing import Collection, Sequence, Union

from ..errors import DataError, PreconditionError


def _item_id(entry: Union[str, tuple]) -> str:
    return entry[0] if isinstance(entry, tuple) else entry


def recall_at_k(ranked: Sequence[Sequence], truth: Sequence[Collection[str]], k: int) -> float:
    """
    Fraction of queries whose top-k contains at least one relevant id.

    Args:
        ranked: Per query, a ranked list of ids or of (id, score) pairs.
        truth: Per query, the relevant ids.
        k: Cutoff, >= 1.

    Raises:
        PreconditionError: If k < 1.
        DataError: If there are no queries or the two lists differ in length.
    """
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if len(ranked) != len(truth):
        raise DataError(f"{len(ranked)} ranked lists for {len(truth)} queries")
    if not ranked:
        raise DataError("recall@k needs at least one query")
    hits = sum(
        1 for results, relevant in zip(ranked, truth)
        if any(_item_id(entry) in relevant for entry in list(results)[:k])
    )
    return hits / len(ranked)
