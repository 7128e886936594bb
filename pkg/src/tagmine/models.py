"""
Pydantic models for the records tagmine reads from and writes to JSON-lines files.
"""

import math
from enum import Enum
from typing import Annotated, Iterator, List, Optional, Tuple

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, StrictStr, field_validator, model_validator


class TagType(str, Enum):
    """Tag category types, in tie-break priority order."""
    ENTITY = "entity"
    ATTRIBUTE = "attribute"
    ACTION = "action"


TAG_TYPE_PRIORITY = {TagType.ENTITY: 0, TagType.ATTRIBUTE: 1, TagType.ACTION: 2}


class CaptionRecord(BaseModel):
    """One image-id/text pair from a corpus stream."""
    model_config = ConfigDict(extra="ignore", frozen=True)

    image_id: StrictStr = Field(..., description="Opaque image key, non-empty")
    text: StrictStr = Field(..., description="UTF-8 caption, may be empty")

    @field_validator("image_id")
    @classmethod
    def image_id_not_empty(cls, v: str) -> str:
        if not v:
            raise ValueError("image_id must be non-empty")
        return v


class RecordError(BaseModel):
    """A corpus line that could not be read as a CaptionRecord."""
    line: int = Field(..., description="0-based line number in the source file")
    message: str = Field(..., description="Why the line was rejected")


class ImageTagSet(BaseModel):
    """The union of vocabulary tag ids parsed from all captions of one image."""
    image_id: StrictStr = Field(..., description="Opaque image key")
    tags: List[int] = Field(default_factory=list, description="Sorted, duplicate-free tag ids")

    @field_validator("tags")
    @classmethod
    def sorted_unique(cls, v: List[int]) -> List[int]:
        if any(t < 0 for t in v):
            raise ValueError("tag ids must be non-negative")
        return sorted(set(v))


class ParseResult(BaseModel):
    """Heads, modifiers and relations extracted from one caption."""
    heads: List[str] = Field(default_factory=list, description="Noun-phrase heads, multi-word allowed")
    modifiers: List[Tuple[str, str]] = Field(default_factory=list, description="(modifier, attached head)")
    relations: List[Tuple[str, str, str]] = Field(
        default_factory=list, description="(subject head, relation word, object head)"
    )

    @model_validator(mode="after")
    def endpoints_are_heads(self) -> "ParseResult":
        heads = set(self.heads)
        for modifier, head in self.modifiers:
            if head not in heads:
                raise ValueError(f"modifier '{modifier}' attaches to unknown head '{head}'")
        for subject, relation, obj in self.relations:
            if subject not in heads or obj not in heads:
                raise ValueError(f"relation '{relation}' links unknown heads ('{subject}', '{obj}')")
        return self


class ParsedTags(BaseModel):
    """Normalized tags projected from a parse: head -> entity, modifier -> attribute, relation -> action."""
    entities: List[str] = Field(default_factory=list)
    attributes: List[str] = Field(default_factory=list)
    actions: List[str] = Field(default_factory=list)

    def typed(self) -> Iterator[Tuple[TagType, str]]:
        """Iterate (type, tag) pairs in entity, attribute, action order."""
        for tag in self.entities:
            yield TagType.ENTITY, tag
        for tag in self.attributes:
            yield TagType.ATTRIBUTE, tag
        for tag in self.actions:
            yield TagType.ACTION, tag

    def __len__(self) -> int:
        return len(self.entities) + len(self.attributes) + len(self.actions)


class ParsedCaption(BaseModel):
    """One line of `tagmine parse` output."""
    line: int = Field(..., description="Line number of the source record")
    image_id: StrictStr
    text: StrictStr
    parse: ParseResult
    tags: ParsedTags


def _finite(values: List[float]) -> List[float]:
    if not all(math.isfinite(x) for x in values):
        raise ValueError("vector entries must be finite")
    return values


FiniteVector = Annotated[List[float], Field(min_length=1), AfterValidator(_finite)]


class FeatureRecord(BaseModel):
    """A frozen image feature vector standing in for image-encoder output."""
    image_id: StrictStr
    vector: FiniteVector


class PredictionRecord(BaseModel):
    """Per-image predictions: either a score per category or a binary tag id list."""
    image_id: StrictStr
    scores: Optional[List[float]] = None
    tags: Optional[List[int]] = None

    @model_validator(mode="after")
    def exactly_one_kind(self) -> "PredictionRecord":
        if (self.scores is None) == (self.tags is None):
            raise ValueError("prediction needs exactly one of 'scores' or 'tags'")
        return self


class GalleryRecord(BaseModel):
    """One retrieval gallery item."""
    id: StrictStr
    vector: FiniteVector
    tags: List[int] = Field(default_factory=list)
