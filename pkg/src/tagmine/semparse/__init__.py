"""
Caption semantic parsing: heads, modifiers and relations, projected onto tag types.

    head -> entity (object/scene), modifier -> attribute, relation word -> action
"""

from functools import lru_cache
from typing import Iterable, List, Optional

from ..errors import PreconditionError
from ..models import ParsedTags, ParseResult
from .base import BaseParser
from .normalize import normalize_tag

PARSER_MODES = ("builtin", "external")


def _get_parser_class(mode: str) -> type[BaseParser]:
    """Import and return the parser class for a mode."""
    if mode == "builtin":
        from .builtin import BuiltinParser
        return BuiltinParser
    elif mode == "external":
        from .external import ExternalParser
        return ExternalParser
    else:
        raise PreconditionError(f"parser mode '{mode}' is not supported (choose from {', '.join(PARSER_MODES)})")


@lru_cache(maxsize=8)
def get_parser(mode: str = "builtin", sidecar: Optional[str] = None) -> BaseParser:
    """
    Return a parser backend, loading each external sidecar only once.

    Args:
        mode: "builtin" or "external".
        sidecar: Sidecar path, required by the external mode.
    """
    parser_class = _get_parser_class(mode)
    if mode == "external":
        if not sidecar:
            raise PreconditionError("external parse mode needs a sidecar file")
        return parser_class(sidecar)
    return parser_class()


def parse_caption(text: str, mode: str = "builtin", sidecar: Optional[str] = None,
                  line: Optional[int] = None) -> ParseResult:
    """
    Parse one caption into heads, modifiers and relations.

    Args:
        text: Caption text; any string is accepted in builtin mode.
        mode: "builtin" for the rule-based chunker, "external" for sidecar parses.
        sidecar: Sidecar JSON-lines path for the external mode.
        line: Corpus line number, used to find the caption's sidecar record.

    Returns:
        The ParseResult.

    Raises:
        ParseError: External mode with a missing or invalid sidecar record.
    """
    return get_parser(mode, sidecar).parse(text, line=line)


def _dedup(values: Iterable[str]) -> List[str]:
    seen = {}
    for value in values:
        tag = normalize_tag(value)
        if tag:
            seen.setdefault(tag, None)
    return list(seen)


def project_tags(parse: ParseResult) -> ParsedTags:
    """Normalize and de-duplicate heads, modifier words and relation words, in first-occurrence order."""
    return ParsedTags(
        entities=_dedup(parse.heads),
        attributes=_dedup(modifier for modifier, _ in parse.modifiers),
        actions=_dedup(relation for _, relation, _ in parse.relations),
    )


__all__ = [
    "PARSER_MODES",
    "BaseParser",
    "get_parser",
    "normalize_tag",
    "parse_caption",
    "project_tags",
]
