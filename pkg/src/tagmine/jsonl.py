"""
JSON-lines and TSV file plumbing shared by the CLI and the module loaders.
"""

import json
import logging
from typing import IO, Iterable, Iterator, List, Sequence, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from .errors import DataError

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)


def iter_lines(path: str) -> Iterator[Tuple[int, str]]:
    """Yield (0-based line number, stripped line) for every line of a UTF-8 file.

    Raises:
        DataError: If the file cannot be opened or decoded.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            for number, line in enumerate(f):
                yield number, line.rstrip("\n").rstrip("\r")
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}") from e


def read_models(path: str, model: Type[M]) -> List[M]:
    """Read every non-blank line of a JSON-lines file as a pydantic model.

    Unlike corpus streaming, any bad line is fatal here: these files are produced by
    tagmine itself and a broken one means the pipeline upstream is broken.
    """
    records = []
    for number, line in iter_lines(path):
        if not line.strip():
            continue
        try:
            records.append(model.model_validate_json(line))
        except ValidationError as e:
            raise DataError(f"{path}:{number}: invalid {model.__name__}: {describe_validation_error(e)}") from e
    logger.debug(f"Read {len(records)} {model.__name__} records from {path}")
    return records


def describe_validation_error(e: ValidationError) -> str:
    errors = e.errors()
    if not errors:
        return str(e)
    first = errors[0]
    where = ".".join(str(part) for part in first.get("loc", ())) or "record"
    return f"{where}: {first.get('msg', 'invalid')}"


def write_models(out: IO[str], records: Iterable[BaseModel]) -> int:
    """Write models as compact JSON lines; returns the number written."""
    count = 0
    for record in records:
        out.write(record.model_dump_json(exclude_none=True))
        out.write("\n")
        count += 1
    return count


def write_json_lines(out: IO[str], objects: Iterable[dict]) -> int:
    count = 0
    for obj in objects:
        out.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
        out.write("\n")
        count += 1
    return count


def write_tsv(out: IO[str], header: Sequence[str], rows: Iterable[Sequence[object]]):
    out.write("\t".join(header))
    out.write("\n")
    for row in rows:
        out.write("\t".join(format_cell(cell) for cell in row))
        out.write("\n")


def format_cell(cell: object) -> str:
    if cell is None:
        return "NA"
    if isinstance(cell, float):
        return f"{cell:.4f}"
    return str(cell)
