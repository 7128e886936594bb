"""Exception hierarchy shared by every tagmine module."""


class TagmineError(Exception):
    """Base class for all tagmine errors."""


class DataError(TagmineError):
    """Input data is malformed or inconsistent (bad lines, unknown ids, mismatched sizes)."""


class ShapeError(DataError):
    """Matrix or vector shapes do not agree."""


class ParseError(DataError):
    """An external parse record is missing or invalid."""


class PreconditionError(TagmineError, ValueError):
    """An operation was called with arguments outside its precondition."""
