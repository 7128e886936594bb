import json
import random

import pytest

from tagmine.corpus import (
    aggregate_image_tags,
    finalize_aggregate,
    merge_tag_sets,
    parallel_map,
    parse_shard_spec,
    partial_aggregate,
    shuffle_tags,
    stream_records,
)
from tagmine.errors import DataError, PreconditionError
from tagmine.models import CaptionRecord, RecordError


def _corpus(n):
    return [json.dumps({"image_id": f"img{i // 2}", "text": f"caption {i}"}) for i in range(n)]


def test_shard_selects_lines_by_modulus(write_lines):
    path = write_lines("corpus.jsonl", _corpus(4))
    lines = [line for line, _ in stream_records(path, (0, 2))]
    assert lines == [0, 2]


def test_shard_index_out_of_range(write_lines):
    path = write_lines("corpus.jsonl", _corpus(4))
    with pytest.raises(PreconditionError):
        list(stream_records(path, (1, 1)))


@pytest.mark.parametrize("count", [1, 2, 3, 5, 8])
def test_shards_partition_the_stream(write_lines, count):
    path = write_lines("corpus.jsonl", _corpus(23))
    full = list(stream_records(path))
    pieces = [item for index in range(count) for item in stream_records(path, (index, count))]
    assert sorted(pieces, key=lambda item: item[0]) == full
    for index in range(count):
        lines = [line for line, _ in stream_records(path, (index, count))]
        assert lines == sorted(lines)


def test_malformed_line_is_reported_and_stream_continues(write_lines):
    path = write_lines("corpus.jsonl", [
        json.dumps({"image_id": "a", "text": "a dog"}),
        "{not json",
        json.dumps({"image_id": "b", "text": "a cat", "extra": 1}),
    ])
    items = list(stream_records(path))
    assert [line for line, _ in items] == [0, 1, 2]
    assert isinstance(items[0][1], CaptionRecord)
    assert isinstance(items[1][1], RecordError) and items[1][1].line == 1
    assert items[2][1] == CaptionRecord(image_id="b", text="a cat")


def test_empty_image_id_and_wrong_types_are_record_errors(write_lines):
    path = write_lines("corpus.jsonl", [
        json.dumps({"image_id": "", "text": "x"}),
        json.dumps({"image_id": 3, "text": "x"}),
        json.dumps({"image_id": "c"}),
        json.dumps({"image_id": "d", "text": ""}),
    ])
    items = [record for _, record in stream_records(path)]
    assert [type(r) for r in items] == [RecordError, RecordError, RecordError, CaptionRecord]


def test_blank_lines_are_skipped(write_lines):
    path = write_lines("corpus.jsonl", [json.dumps({"image_id": "a", "text": "x"}), "", "   ",
                                        json.dumps({"image_id": "b", "text": "y"})])
    items = list(stream_records(path))
    assert [line for line, _ in items] == [0, 3]
    assert all(isinstance(record, CaptionRecord) for _, record in items)
    assert [line for line, _ in stream_records(path, (1, 2))] == [3]


def test_unreadable_file(tmp_path):
    with pytest.raises(DataError):
        list(stream_records(str(tmp_path / "missing.jsonl")))


@pytest.mark.parametrize("spec,expected", [("0/1", (0, 1)), ("3/8", (3, 8))])
def test_parse_shard_spec(spec, expected):
    assert parse_shard_spec(spec) == expected


@pytest.mark.parametrize("spec", ["", "1", "a/b", "2/2", "0/0", "-1/4"])
def test_parse_shard_spec_rejects(spec):
    with pytest.raises(PreconditionError):
        parse_shard_spec(spec)


def test_aggregate_unions_per_image():
    result = aggregate_image_tags([("a", {1, 2}), ("a", {2, 3}), ("b", set())])
    assert [(t.image_id, t.tags) for t in result] == [("a", [1, 2, 3]), ("b", [])]


def test_aggregate_single_input_is_identity():
    result = aggregate_image_tags([("x", [5, 1])])
    assert [(t.image_id, t.tags) for t in result] == [("x", [1, 5])]


def test_aggregate_five_captions_per_image():
    captions = [
        ("img1", {0, 4}), ("img1", {0}), ("img1", {7}), ("img1", set()), ("img1", {4, 9}),
        ("img2", {1}), ("img2", {1, 2}), ("img2", {3}), ("img2", {1}), ("img2", {2}),
    ]
    result = {t.image_id: t.tags for t in aggregate_image_tags(captions)}
    assert result == {"img1": [0, 4, 7, 9], "img2": [1, 2, 3]}


def test_aggregate_is_order_insensitive():
    rng = random.Random(7)
    pairs = [(f"img{rng.randrange(10)}", {rng.randrange(20) for _ in range(3)}) for _ in range(200)]
    expected = aggregate_image_tags(pairs)
    for _ in range(5):
        rng.shuffle(pairs)
        assert aggregate_image_tags(pairs) == expected


def test_partial_aggregates_merge_to_the_full_result():
    pairs = [(f"img{i % 7}", {i % 5, i % 3}) for i in range(60)]
    full = aggregate_image_tags(pairs)
    left = partial_aggregate(pairs[:25])
    right = partial_aggregate(pairs[25:])
    assert finalize_aggregate(merge_tag_sets(left, right)) == full
    assert finalize_aggregate(merge_tag_sets(right, left)) == full


def test_shuffle_edge_cases():
    assert shuffle_tags([], 3) == []
    assert shuffle_tags(["dog"], 3) == ["dog"]


def test_shuffle_is_a_seeded_permutation():
    tags = ["dog", "beach", "run", "red"]
    a = shuffle_tags(tags, 1)
    b = shuffle_tags(tags, 2)
    assert sorted(a) == sorted(tags) and sorted(b) == sorted(tags)
    assert shuffle_tags(tags, 1) == a
    assert tags == ["dog", "beach", "run", "red"]


def test_shuffle_covers_all_permutations():
    seen = {tuple(shuffle_tags([1, 2, 3], seed)) for seed in range(300)}
    assert len(seen) == 6


def _square(x):
    return x * x


def test_parallel_map_keeps_input_order():
    items = list(range(20))
    assert parallel_map(_square, items, workers=1) == [x * x for x in items]
    assert parallel_map(_square, items, workers=3) == [x * x for x in items]
