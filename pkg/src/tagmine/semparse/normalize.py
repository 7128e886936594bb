"""
Rule-table normalization of tag strings.

Only the last word of a phrase is reduced (it is the head of a noun phrase, or the
verb/preposition itself for relations); earlier words are lowercased and stripped.
Reduction runs to a fixpoint, which makes normalize_tag idempotent.
"""

import string
from functools import lru_cache

from .lexicon import INVARIANT, IRREGULAR, NOUN_ING, VERBS

_PUNCTUATION = string.punctuation + "‘’“”…"
_VOWELS = frozenset("aeiouy")
_KEEP_DOUBLED = frozenset("lsfz")
_MAX_PASSES = 8


def _has_vowel(word: str) -> bool:
    return any(ch in _VOWELS for ch in word)


def _strip_ing(word: str) -> str:
    stem = word[:-3]
    if not _has_vowel(stem):
        return word
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _KEEP_DOUBLED:
        return stem[:-1]
    if stem + "e" in VERBS:
        return stem + "e"
    last = stem[-1]
    if last in "vcz" or (last == "g" and not stem.endswith("ng")) or (last == "s" and not stem.endswith("ss")):
        return stem + "e"
    return stem


def _strip_ed(word: str) -> str:
    # Past forms are only reduced when the verb is known: "bed" and "red" are not verbs.
    stem = word[:-2]
    candidates = [word[:-1], stem]
    if len(stem) >= 2 and stem[-1] == stem[-2]:
        candidates.append(stem[:-1])
    if word.endswith("ied"):
        candidates.append(word[:-3] + "y")
    for candidate in candidates:
        if candidate in VERBS:
            return candidate
    return word


def _singularize(word: str) -> str:
    if len(word) <= 3 or word.endswith(("ss", "us", "is")):
        return word
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(("ches", "shes", "xes", "zzes", "sses")):
        return word[:-2]
    if word.endswith("s"):
        return word[:-1]
    return word


def reduce_word(word: str) -> str:
    """Apply one reduction step: irregular table, -ing, -ed, then plural rules."""
    if word in IRREGULAR:
        return IRREGULAR[word]
    if word in INVARIANT:
        return word
    if word.endswith("ing") and len(word) > 4 and word not in NOUN_ING:
        reduced = _strip_ing(word)
        if reduced != word:
            return reduced
    if word.endswith("ed") and len(word) > 4:
        reduced = _strip_ed(word)
        if reduced != word:
            return reduced
    return _singularize(word)


@lru_cache(maxsize=65536)
def normalize_word(word: str) -> str:
    """Reduce a single lowercase word until no rule applies."""
    seen = {word}
    while True:
        reduced = reduce_word(word)
        if reduced == word or reduced in seen:
            return reduced
        seen.add(reduced)
        word = reduced


def clean_word(raw: str) -> str:
    """Lowercase, strip surrounding punctuation and possessive 's."""
    word = raw.lower().strip(_PUNCTUATION)
    while word.endswith(("'s", "’s")):
        word = word[:-2].strip(_PUNCTUATION)
    return word


def normalize_tag(raw: str) -> str:
    """
    Normalize a raw tag string to its canonical surface form.

    Args:
        raw: Any string, e.g. "Dogs", "running", "Alarm clock."

    Returns:
        Lowercase words joined by single spaces with the final word singularized or
        reduced to its verb stem; empty string if nothing is left.
    """
    text = raw
    for _ in range(_MAX_PASSES):
        normalized = _normalize_once(text)
        if normalized == text:
            break
        text = normalized
    return text


def _normalize_once(raw: str) -> str:
    words = [w for w in (clean_word(part) for part in raw.split()) if w]
    if not words:
        return ""
    words[-1] = normalize_word(words[-1])
    return " ".join(words)
