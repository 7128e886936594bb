from abc import ABC, abstractmethod
from typing import Optional

from ..models import ParseResult


class BaseParser(ABC):
    """
    Abstract base class for caption parsers.

    Every parser turns one caption into heads, modifiers and relations; the projection
    onto tags is shared, so parser backends are interchangeable.
    """

    name: str = "base"

    @abstractmethod
    def parse(self, text: str, line: Optional[int] = None) -> ParseResult:
        """
        Parse one caption.

        Args:
            text: The caption text.
            line: Line number of the caption in its corpus file, for backends that key
                pre-computed parses by line.

        Returns:
            The caption's ParseResult.
        """
        pass
