import random

import pytest

from tagmine.semparse import normalize_tag
from tagmine.semparse.normalize import clean_word, normalize_word


@pytest.mark.parametrize("raw,expected", [
    ("Dogs", "dog"),
    ("alarm clock", "alarm clock"),
    ("Alarm Clock.", "alarm clock"),
    ("  dog's  ", "dog"),
    ("hot dogs", "hot dog"),
    ("running shoes", "running shoe"),
    ("", ""),
    ("...", ""),
])
def test_normalize_examples(raw, expected):
    assert normalize_tag(raw) == expected


@pytest.mark.parametrize("word,expected", [
    # -ing: plain, doubled consonant, restored e, irregular
    ("running", "run"),
    ("sitting", "sit"),
    ("walking", "walk"),
    ("riding", "ride"),
    ("grazing", "graze"),
    ("making", "make"),
    ("dancing", "dance"),
    ("flying", "fly"),
    ("lying", "lie"),
    ("skiing", "ski"),
    # -ed only for known verbs
    ("parked", "park"),
    ("jumped", "jump"),
    ("stopped", "stop"),
    ("carried", "carry"),
    ("bed", "bed"),
    ("red", "red"),
    # plurals
    ("benches", "bench"),
    ("boxes", "box"),
    ("puppies", "puppy"),
    ("horses", "horse"),
    ("men", "man"),
    ("children", "child"),
    ("people", "person"),
    ("leaves", "leaf"),
    # left alone
    ("glass", "glass"),
    ("bus", "bus"),
    ("sheep", "sheep"),
    ("building", "building"),
    ("grass", "grass"),
    ("cactus", "cactus"),
])
def test_suffix_rule_table(word, expected):
    assert normalize_word(word) == expected
    assert normalize_tag(word) == expected


def test_clean_word_strips_possessive_and_punctuation():
    assert clean_word("“Dog’s”") == "dog"
    assert clean_word("(beach)") == "beach"


def test_normalize_is_idempotent():
    pool = [
        "Dogs", "running", "alarm", "clocks", "men's", "sitting,", "boxes", "is", "series",
        "puppies", "carried", "ies", "sses", "ss", "a", "café", "Straße", "123", "«»", "!!",
        "hot", "dog", "stands", "skiing", "lying", "glasses", "buses", "knives", "x", "'s's",
    ]
    rng = random.Random(0)
    for _ in range(2000):
        raw = " ".join(rng.choice(pool) for _ in range(rng.randint(0, 4)))
        once = normalize_tag(raw)
        assert normalize_tag(once) == once, raw
