import json
import logging
from typing import Dict, Optional

from pydantic import ValidationError

from ..errors import ParseError
from ..jsonl import describe_validation_error, iter_lines
from ..models import ParseResult
from .base import BaseParser

logger = logging.getLogger(__name__)


class ExternalParser(BaseParser):
    """
    Parses produced by an external dependency parser, read from a JSON-lines sidecar.

    Each sidecar object holds "heads", "modifiers" and "relations" for one corpus line.
    The corpus line it belongs to is its "line" key, or its own position in the sidecar
    when the key is absent.
    """

    name = "external"

    def __init__(self, sidecar_path: str):
        """
        Args:
            sidecar_path: Path to the sidecar JSON-lines file.

        Raises:
            ParseError: If a sidecar object is not valid JSON or not a valid parse.
            DataError: If the sidecar cannot be read.
        """
        self.sidecar_path = sidecar_path
        self.records: Dict[int, ParseResult] = {}
        self._load()

    def _load(self):
        position = 0
        for number, raw in iter_lines(self.sidecar_path):
            if not raw.strip():
                continue
            where = f"{self.sidecar_path}:{number}"
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ParseError(f"{where}: sidecar record is not valid JSON ({e.msg})") from e
            if not isinstance(obj, dict):
                raise ParseError(f"{where}: sidecar record must be a JSON object")

            line = obj.pop("line", position)
            if not isinstance(line, int) or isinstance(line, bool) or line < 0:
                raise ParseError(f"{where}: sidecar 'line' must be a non-negative integer, got {line!r}")
            try:
                parse = ParseResult.model_validate(obj)
            except ValidationError as e:
                raise ParseError(f"{where}: invalid parse for corpus line {line}: {describe_validation_error(e)}") from e
            if line in self.records:
                raise ParseError(f"{where}: duplicate sidecar record for corpus line {line}")
            self.records[line] = parse
            position += 1
        logger.info(f"Loaded {len(self.records)} external parses from {self.sidecar_path}")

    def parse(self, text: str, line: Optional[int] = None) -> ParseResult:
        if line is None:
            raise ParseError("external parses are keyed by corpus line; no line number given")
        try:
            return self.records[line]
        except KeyError:
            raise ParseError(f"{self.sidecar_path}: no sidecar record for corpus line {line}") from None
