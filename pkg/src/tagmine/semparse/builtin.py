"""
Deterministic rule-based caption chunker.

Words are classed with closed-class lists, a verb lexicon and suffix heuristics; noun
phrases are chunked as (adjective* noun+), and relations link neighbouring noun
phrases through the verbs and prepositions between them.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from ..models import ParseResult
from .base import BaseParser
from .lexicon import (
    ADJECTIVE_COORDINATORS,
    ADJECTIVE_SUFFIXES,
    ADJECTIVES,
    ADVERBS,
    CONJUNCTIONS,
    COPULAS,
    DETERMINERS,
    MULTIWORD_PREPOSITIONS,
    NOUN_ING,
    NUMERALS,
    PREPOSITIONS,
    PRONOUNS,
    VERBS,
)
from .normalize import clean_word, normalize_tag, normalize_word

_TOKEN_RE = re.compile(r"[^\W_]+(?:['’\-][^\W_]+)*|[,.;:!?]")


class WordClass(str, Enum):
    DET = "det"
    NUM = "num"
    COP = "cop"
    PREP = "prep"
    CONJ = "conj"
    PRON = "pron"
    ADV = "adv"
    ADJ = "adj"
    VERB = "verb"
    NOUN = "noun"


_NOMINAL_CONTEXT = (WordClass.DET, WordClass.NUM, WordClass.ADJ)


def tokenize(text: str) -> List[str]:
    """Lowercase word and punctuation tokens, with possessive 's removed."""
    tokens = []
    for raw in _TOKEN_RE.findall(text.lower()):
        if raw in CONJUNCTIONS:
            tokens.append(raw)
            continue
        word = clean_word(raw)
        if word:
            tokens.append(word)
    return tokens


def merge_multiword(tokens: Sequence[str]) -> List[str]:
    """Join multi-word prepositions ("next to", "in front of") into single tokens."""
    merged = []
    i = 0
    while i < len(tokens):
        for phrase in MULTIWORD_PREPOSITIONS:
            if tuple(tokens[i:i + len(phrase)]) == phrase:
                merged.append(" ".join(phrase))
                i += len(phrase)
                break
        else:
            merged.append(tokens[i])
            i += 1
    return merged


def _is_plural(word: str) -> bool:
    return normalize_word(word) != word


def classify(word: str, prev: Optional[WordClass], prev_word: Optional[str]) -> WordClass:
    """Assign a word class from the word and its left neighbour."""
    if word in DETERMINERS:
        return WordClass.DET
    if word in NUMERALS or word.isdigit():
        return WordClass.NUM
    if word in COPULAS:
        return WordClass.COP
    if word in PREPOSITIONS or " " in word:
        return WordClass.PREP
    if word in CONJUNCTIONS:
        return WordClass.CONJ
    if word in PRONOUNS:
        return WordClass.PRON
    if word in ADVERBS:
        return WordClass.ADV
    if word in ADJECTIVES:
        return WordClass.ADJ
    if word.endswith("ly") and len(word) > 4:
        return WordClass.ADV
    if word in NOUN_ING:
        return WordClass.NOUN

    lemma = normalize_word(word)
    if word.endswith("ing") and lemma != word:
        return WordClass.ADJ if prev in (WordClass.DET, WordClass.ADJ) else WordClass.VERB
    if word.endswith("ed") and lemma != word and lemma in VERBS:
        return WordClass.ADJ if prev in _NOMINAL_CONTEXT else WordClass.VERB
    if lemma in VERBS:
        if prev is None or prev in _NOMINAL_CONTEXT:
            return WordClass.NOUN
        if prev == WordClass.NOUN and lemma == word and not _is_plural(prev_word):
            # "bus stop", "hot dog stand": a base form after a singular noun is a compound.
            return WordClass.NOUN
        return WordClass.VERB
    if len(word) > 5 and word.endswith(ADJECTIVE_SUFFIXES):
        return WordClass.ADJ
    return WordClass.NOUN


@dataclass
class _Phrase:
    head: str
    gap: List[Tuple[str, WordClass]] = field(default_factory=list)


class _Chunker:
    """Single-caption state for the chunking pass."""

    def __init__(self):
        self.phrases: List[_Phrase] = []
        self.modifiers: List[Tuple[str, str]] = []
        self.nouns: List[str] = []
        self.adjectives: List[str] = []
        self.gap: List[Tuple[str, WordClass]] = []

    def feed(self, word: str, cls: WordClass):
        if cls == WordClass.NOUN:
            self.nouns.append(word)
            return
        if cls == WordClass.ADJ:
            if self.nouns:
                self.close_phrase()
            self.adjectives.append(word)
            return
        if self.nouns:
            self.close_phrase()
        if self.adjectives:
            if cls == WordClass.ADV or word in ADJECTIVE_COORDINATORS:
                return
            self.flush_predicate()
        self.gap.append((word, cls))

    def close_phrase(self):
        head = normalize_tag(" ".join(self.nouns))
        self.phrases.append(_Phrase(head=head, gap=self.gap))
        self.modifiers.extend((adjective, head) for adjective in self.adjectives)
        self.nouns, self.adjectives, self.gap = [], [], []

    def flush_predicate(self):
        # "the sky is blue": adjectives without a noun describe the previous head.
        if self.phrases:
            head = self.phrases[-1].head
            self.modifiers.extend((adjective, head) for adjective in self.adjectives)
        self.adjectives = []

    def finish(self):
        if self.nouns:
            self.close_phrase()
        if self.adjectives:
            self.flush_predicate()


def link_phrases(phrases: Sequence[_Phrase]) -> List[Tuple[str, str, str]]:
    """Derive (subject, relation, object) triples between neighbouring noun phrases."""
    relations = []
    anchor = [0] * len(phrases)
    last_verb_subject: Optional[int] = None
    for i in range(1, len(phrases)):
        anchor[i] = i
        gap = phrases[i].gap
        if any(cls == WordClass.PRON for _, cls in gap):
            continue

        conj_positions = [k for k, (_, cls) in enumerate(gap) if cls == WordClass.CONJ]
        if conj_positions:
            after = gap[conj_positions[-1] + 1:]
            verbs = [word for word, cls in after if cls == WordClass.VERB]
            if not verbs:
                continue
            subject = last_verb_subject if last_verb_subject is not None else anchor[i - 1]
            relation = normalize_tag(verbs[-1])
            last_verb_subject = subject
        else:
            verbs = [word for word, cls in gap if cls == WordClass.VERB]
            preps = [word for word, cls in gap if cls == WordClass.PREP]
            if verbs:
                subject = anchor[i - 1]
                relation = normalize_tag(verbs[-1])
                last_verb_subject = subject
            elif preps:
                subject = i - 1
                relation = normalize_tag(preps[0])
                anchor[i] = anchor[i - 1]
            else:
                continue
        relations.append((phrases[subject].head, relation, phrases[i].head))
    return relations


class BuiltinParser(BaseParser):
    """Closed-class word lists plus suffix heuristics; never fails."""

    name = "builtin"

    def parse(self, text: str, line: Optional[int] = None) -> ParseResult:
        tokens = merge_multiword(tokenize(text))
        chunker = _Chunker()
        prev: Optional[WordClass] = None
        prev_word: Optional[str] = None
        for word in tokens:
            cls = classify(word, prev, prev_word)
            chunker.feed(word, cls)
            prev, prev_word = cls, word
        chunker.finish()

        return ParseResult(
            heads=[phrase.head for phrase in chunker.phrases],
            modifiers=chunker.modifiers,
            relations=link_phrases(chunker.phrases),
        )
