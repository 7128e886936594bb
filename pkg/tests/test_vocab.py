import io
import os
from collections import Counter

import pytest

from tagmine.errors import DataError, PreconditionError
from tagmine.jsonl import write_models
from tagmine.models import CaptionRecord, ParsedCaption, ParsedTags, TagType
from tagmine.semparse import parse_caption, project_tags
from tagmine.synthetic import make_caption_corpus
from tagmine.vocab import (
    TagVocabulary,
    VocabEntry,
    build_vocab,
    corpus_stats,
    count_frequencies,
    count_parsed_file,
    count_parsed_files,
    load_allowlist,
    load_synonyms,
    merge_frequencies,
    resolve_synonyms,
    vocab_overlap,
)

PARSED = [
    ParsedTags(entities=["dog", "beach"], actions=["run"]),
    ParsedTags(entities=["dog"], attributes=["red"]),
    ParsedTags(entities=["cat", "dog"], attributes=["red"]),
    ParsedTags(entities=["puppy"]),
]


def _freqs(entity=(), attribute=(), action=()):
    return {
        TagType.ENTITY: Counter(dict(entity)),
        TagType.ATTRIBUTE: Counter(dict(attribute)),
        TagType.ACTION: Counter(dict(action)),
    }


def test_counts_each_tag_once_per_caption():
    freqs = count_frequencies([ParsedTags(entities=["dog", "dog"]), ParsedTags(entities=["dog"])])
    assert freqs[TagType.ENTITY]["dog"] == 2


def test_merge_frequencies_adds():
    a = count_frequencies(PARSED[:2])
    b = count_frequencies(PARSED[2:])
    assert merge_frequencies(a, b) == count_frequencies(PARSED)


def test_ranking_by_frequency_then_canonical():
    vocab = build_vocab(count_frequencies(PARSED), top_k=10)
    assert [e.canonical for e in vocab.entries] == ["dog", "red", "beach", "cat", "puppy", "run"]
    assert [e.id for e in vocab.entries] == list(range(6))
    assert [e.frequency for e in vocab.entries] == [3, 2, 1, 1, 1, 1]
    assert vocab.entries[1].type == TagType.ATTRIBUTE
    assert vocab.entries[5].type == TagType.ACTION


def test_top_k_and_min_freq():
    freqs = count_frequencies(PARSED)
    assert [e.canonical for e in build_vocab(freqs, top_k=2).entries] == ["dog", "red"]
    assert [e.canonical for e in build_vocab(freqs, top_k=10, min_freq=2).entries] == ["dog", "red"]


def test_top_k_must_be_positive():
    with pytest.raises(PreconditionError):
        build_vocab(count_frequencies(PARSED), top_k=0)


def test_empty_frequencies_give_empty_vocab():
    assert len(build_vocab(count_frequencies([]), top_k=5)) == 0


def test_synonyms_fold_into_canonical():
    vocab = build_vocab(count_frequencies(PARSED), top_k=10, synonym_table={"puppy": "dog"})
    assert [e.canonical for e in vocab.entries] == ["dog", "red", "beach", "cat", "run"]
    assert vocab.entries[0].frequency == 4
    assert vocab.entries[0].synonyms == frozenset({"puppy"})
    assert vocab.id_of("Puppies") == 0


def test_synonym_chains_and_cycles():
    assert resolve_synonyms({"a": "b", "b": "c"}) == {"a": "c", "b": "c"}
    with pytest.raises(DataError):
        resolve_synonyms({"a": "b", "b": "a"})
    with pytest.raises(DataError):
        build_vocab(count_frequencies(PARSED), top_k=5, synonym_table={"dog": "cat", "cat": "dog"})


@pytest.mark.parametrize("entity,attribute,action,expected", [
    (2, 0, 2, TagType.ENTITY),
    (0, 3, 3, TagType.ATTRIBUTE),
    (1, 0, 3, TagType.ACTION),
    (2, 2, 2, TagType.ENTITY),
])
def test_type_is_majority_with_priority_ties(entity, attribute, action, expected):
    freqs = _freqs(
        entity=[("run", entity)] if entity else (),
        attribute=[("run", attribute)] if attribute else (),
        action=[("run", action)] if action else (),
    )
    vocab = build_vocab(freqs, top_k=1)
    assert vocab.entries[0].type == expected
    assert vocab.entries[0].frequency == entity + attribute + action


def test_allow_and_deny_lists():
    freqs = count_frequencies(PARSED)
    denied = build_vocab(freqs, top_k=10, allowlist=(set(), {"red"}))
    assert [e.canonical for e in denied.entries] == ["dog", "beach", "cat", "puppy", "run"]
    assert [e.id for e in denied.entries] == list(range(5))
    allowed = build_vocab(freqs, top_k=10, allowlist=({"cat", "dog"}, set()))
    assert [e.canonical for e in allowed.entries] == ["dog", "cat"]


def test_resolve_drops_unknown_tags():
    vocab = build_vocab(count_frequencies(PARSED), top_k=10, synonym_table={"puppy": "dog"})
    assert vocab.resolve(ParsedTags(entities=["puppy", "horse"], attributes=["red"])) == [0, 1]


def test_save_and_load(tmp_path):
    vocab = build_vocab(count_frequencies(PARSED), top_k=10, synonym_table={"puppy": "dog"})
    path = tmp_path / "vocab.tsv"
    with open(path, "w", encoding="utf-8") as f:
        vocab.save(f)
    assert path.read_text(encoding="utf-8").splitlines()[:2] == [
        "id\tcanonical\ttype\tfrequency\tsynonyms",
        "0\tdog\tentity\t4\tpuppy",
    ]
    loaded = TagVocabulary.load(str(path))
    assert loaded.entries == vocab.entries
    assert loaded.checksum() == vocab.checksum()
    assert loaded.type_counts() == {TagType.ENTITY: 3, TagType.ATTRIBUTE: 1, TagType.ACTION: 1}


def test_checksum_depends_on_order():
    a = TagVocabulary([VocabEntry(0, "dog", TagType.ENTITY, 2), VocabEntry(1, "cat", TagType.ENTITY, 1)])
    b = TagVocabulary([VocabEntry(0, "cat", TagType.ENTITY, 2), VocabEntry(1, "dog", TagType.ENTITY, 1)])
    assert a.checksum() != b.checksum()
    assert len(a.checksum()) == 16


def test_inconsistent_vocabularies_are_rejected():
    with pytest.raises(DataError):
        TagVocabulary([VocabEntry(0, "dog", TagType.ENTITY, 1, frozenset({"cat"})), VocabEntry(1, "cat", TagType.ENTITY, 1)])
    with pytest.raises(DataError):
        TagVocabulary([VocabEntry(1, "dog", TagType.ENTITY, 1)])


@pytest.mark.parametrize("lines", [
    [],
    ["id\tname"],
    ["id\tcanonical\ttype\tfrequency\tsynonyms", "0\tdog\tentity\t1"],
    ["id\tcanonical\ttype\tfrequency\tsynonyms", "0\tdog\tanimal\t1\t"],
    ["id\tcanonical\ttype\tfrequency\tsynonyms", "x\tdog\tentity\t1\t"],
])
def test_load_rejects_malformed_files(write_lines, lines):
    with pytest.raises(DataError):
        TagVocabulary.load(write_lines("vocab.tsv", lines))


def test_load_synonyms(write_lines):
    path = write_lines("synonyms.tsv", ["# surface\tcanonical", "", "Puppies\tdog", "doggy\tDogs", "dog\tdog"])
    assert load_synonyms(path) == {"puppy": "dog", "doggy": "dog"}


@pytest.mark.parametrize("lines", [["puppy\tdog", "puppy\tcat"], ["no tab here"], ["a\tb\tc"], ["...\tdog"]])
def test_load_synonyms_rejects(write_lines, lines):
    with pytest.raises(DataError):
        load_synonyms(write_lines("synonyms.tsv", lines))


def test_load_allowlist(write_lines):
    path = write_lines("allow.txt", ["Dogs", "-Red", "# comment", "", "cat"])
    assert load_allowlist(path) == ({"dog", "cat"}, {"red"})


def test_overlap_with_external_list():
    vocab = build_vocab(count_frequencies(PARSED), top_k=10, synonym_table={"puppy": "dog"})
    external = ["Dogs", "puppies", "horse", "Red"]
    assert vocab_overlap(vocab, external) == (2, ["dog", "red"])
    assert vocab_overlap(vocab, external, TagType.ENTITY) == (1, ["dog"])
    assert vocab_overlap(vocab, []) == (0, [])


def test_corpus_stats():
    records = [CaptionRecord(image_id="a", text="x"), CaptionRecord(image_id="a", text="y"),
               CaptionRecord(image_id="b", text="")]
    tags = [ParsedTags(entities=["dog", "beach"], actions=["run"]), ParsedTags(entities=["dog", "cat"]),
            ParsedTags()]
    stats = corpus_stats(records, tags)
    assert (stats.n_images, stats.n_texts, stats.n_tags) == (2, 3, 5)
    assert stats.avg_texts_per_image == 1.5
    assert stats.avg_tags_per_image == 2.5


def test_corpus_stats_errors():
    with pytest.raises(DataError):
        corpus_stats([], [])
    with pytest.raises(DataError):
        corpus_stats([CaptionRecord(image_id="a", text="x")], [])
    with pytest.raises(DataError):
        corpus_stats([CaptionRecord(image_id="a", text="x")], [ParsedTags(), ParsedTags()])


def _parsed_captions(records):
    parsed = []
    for line, record in enumerate(records):
        result = parse_caption(record.text)
        parsed.append(ParsedCaption(line=line, image_id=record.image_id, text=record.text,
                                    parse=result, tags=project_tags(result)))
    return parsed


def test_count_parsed_file(tmp_path):
    parsed = _parsed_captions(make_caption_corpus(50, seed=1))
    path = tmp_path / "parsed.jsonl"
    with open(path, "w", encoding="utf-8") as f:
        write_models(f, parsed)
    assert count_parsed_file(str(path)) == count_frequencies(p.tags for p in parsed)


def test_vocab_identical_across_shard_counts(tmp_path):
    parsed = _parsed_captions(make_caption_corpus(50_000, seed=3))
    outputs = []
    for count in (1, 2, 8):
        paths = []
        for index in range(count):
            path = tmp_path / f"parsed-{count}-{index}.jsonl"
            with open(path, "w", encoding="utf-8") as f:
                write_models(f, (p for p in parsed if p.line % count == index))
            paths.append(str(path))
        vocab = build_vocab(count_parsed_files(paths, workers=min(count, 4)), top_k=200)
        out = io.StringIO()
        vocab.save(out)
        outputs.append(out.getvalue())
    assert outputs[0] == outputs[1] == outputs[2]
    assert len(outputs[0].splitlines()) > 20


@pytest.mark.skipif(
    not (os.environ.get("TAGMINE_CATEGORY_LIST") and os.environ.get("TAGMINE_VOCAB")),
    reason="needs TAGMINE_CATEGORY_LIST and TAGMINE_VOCAB",
)
def test_overlap_with_published_category_list():
    vocab = TagVocabulary.load(os.environ["TAGMINE_VOCAB"])
    with open(os.environ["TAGMINE_CATEGORY_LIST"], encoding="utf-8") as f:
        categories = [line.strip() for line in f if line.strip()]
    count, _ = vocab_overlap(vocab, categories)
    assert count == int(os.environ.get("TAGMINE_EXPECTED_OVERLAP", "73"))
