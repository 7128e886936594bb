import math

import numpy as np
import pytest

from tagmine.corpus import make_rng
from tagmine.errors import DataError, PreconditionError, ShapeError
from tagmine.evalkit import recall_at_k
from tagmine.models import GalleryRecord, TagType
from tagmine.rerank import (
    Gallery,
    GalleryItem,
    Query,
    combined_score,
    keyword_search,
    keywords_to_ids,
    query_from_text,
    rerank,
)
from tagmine.synthetic import make_retrieval_task
from tagmine.vocab import TagVocabulary, VocabEntry


def _item(id, embedding, tags=()):
    return GalleryItem(id, np.array(embedding, dtype=np.float64), frozenset(tags))


GALLERY = [
    _item("c", [0.0, 1.0], {1}),
    _item("b", [1.0, 0.0], {0, 1}),
    _item("a", [1.0, 0.0], {0, 1}),
    _item("d", [-1.0, 0.0]),
]


def test_combined_score_formula():
    query = Query(embedding=np.array([1.0, 1.0]), tags=frozenset({0, 2}))
    score = combined_score(query, _item("x", [2.0, 0.0], {0, 1}), alpha=0.5)
    assert score == pytest.approx(0.5 * (1 / math.sqrt(2)) + 0.5 * 0.5)


def test_combined_score_needs_an_embedding():
    with pytest.raises(PreconditionError):
        combined_score(Query(tags=frozenset({0})), GALLERY[0], 0.5)


def test_rerank_breaks_ties_by_id():
    ranked = rerank(Query(embedding=np.array([1.0, 0.0]), tags=frozenset({0})), GALLERY, alpha=0.8, top_k=10)
    assert [id for id, _ in ranked] == ["a", "b", "c", "d"]
    assert ranked[0][1] == pytest.approx(1.0)
    assert ranked[3][1] == pytest.approx(-0.8)


def test_tags_can_reorder_results():
    query = Query(embedding=np.array([0.0, 1.0]), tags=frozenset({0}))
    by_embedding = rerank(query, GALLERY, alpha=1.0, top_k=1)
    by_tags = rerank(query, GALLERY, alpha=0.0, top_k=2)
    assert by_embedding[0][0] == "c"
    assert [id for id, _ in by_tags] == ["a", "b"]


def test_top_k_truncates():
    query = Query(embedding=np.array([0.0, 1.0]))
    assert [id for id, _ in rerank(query, GALLERY, 0.5, 2)] == ["c", "a"]


def test_empty_gallery():
    assert rerank(Query(embedding=np.array([1.0])), [], 0.5, 5) == []
    assert keyword_search([1], [], 5) == []


def test_query_without_embedding_uses_tags_only(caplog):
    ranked = rerank(Query(tags=frozenset({1})), GALLERY, alpha=0.8, top_k=4)
    assert [id for id, _ in ranked] == ["a", "b", "c", "d"]
    assert [score for _, score in ranked] == [1.0, 1.0, 1.0, 0.0]
    assert "no embedding" in caplog.text


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_alpha_must_lie_in_unit_interval(alpha):
    with pytest.raises(PreconditionError):
        rerank(Query(embedding=np.array([1.0, 0.0])), GALLERY, alpha, 3)


def test_rerank_preconditions():
    with pytest.raises(PreconditionError):
        rerank(Query(embedding=np.array([1.0, 0.0])), GALLERY, 0.5, 0)
    with pytest.raises(ShapeError):
        rerank(Query(embedding=np.array([1.0, 0.0, 0.0])), GALLERY, 0.5, 3)
    with pytest.raises(DataError):
        rerank(Query(embedding=np.zeros(2)), GALLERY, 0.5, 3)


def test_gallery_validation():
    with pytest.raises(DataError):
        Gallery([_item("a", [1.0]), _item("a", [2.0])])
    with pytest.raises(ShapeError):
        Gallery([_item("a", [1.0]), _item("b", [1.0, 2.0])])
    with pytest.raises(DataError):
        Gallery([_item("a", [0.0, 0.0])])


def test_gallery_from_records():
    gallery = Gallery.from_records([GalleryRecord(id="z", vector=[3.0, 4.0], tags=[2])])
    assert len(gallery) == 1
    assert gallery.embeddings.tolist() == [[0.6, 0.8]]
    assert gallery.tag_overlap([2, 7]).tolist() == [1.0]


def test_keyword_search():
    ranked = keyword_search([0, 1], GALLERY, top_k=4)
    assert ranked == [("a", 1.0), ("b", 1.0), ("c", 0.5), ("d", 0.0)]
    with pytest.raises(PreconditionError):
        keyword_search([], GALLERY, 3)


def _vocab():
    return TagVocabulary([
        VocabEntry(0, "dog", TagType.ENTITY, 5, frozenset({"puppy"})),
        VocabEntry(1, "beach", TagType.ENTITY, 3),
        VocabEntry(2, "run", TagType.ACTION, 2),
    ])


def test_keywords_to_ids(caplog):
    assert keywords_to_ids(["Puppies", "2", " beach ", "", "zebra", "9"], _vocab()) == [0, 1, 2]
    assert "zebra" in caplog.text


def test_query_from_text():
    query = query_from_text("a puppy running on the beach", _vocab(), embedding=[1.0, 0.0])
    assert query.tags == frozenset({0, 1, 2})
    assert query.embedding.tolist() == [1.0, 0.0]
    assert query_from_text("a cat", _vocab()).tags == frozenset()


def test_tag_weighting_does_not_lower_recall_at_1():
    n_trials, wins = 100, 0
    for seed in range(n_trials):
        task = make_retrieval_task(n_queries=100, n_items=1000, seed=seed)
        gallery = Gallery(task.gallery)
        truth = [{relevant} for relevant in task.relevant]
        embedding_only = [rerank(q, gallery, alpha=1.0, top_k=1) for q in task.queries]
        with_tags = [rerank(q, gallery, alpha=0.8, top_k=1) for q in task.queries]
        if recall_at_k(with_tags, truth, 1) >= recall_at_k(embedding_only, truth, 1):
            wins += 1
    assert wins / n_trials >= 0.95


def _random_scene(rng, n_items=30, dim=8, n_tags=6):
    embeddings = rng.normal(size=(n_items, dim))
    embeddings /= np.linalg.norm(embeddings, axis=1, keepdims=True)
    items = [
        GalleryItem(f"i{n:03d}", embeddings[n], frozenset(int(t) for t in np.flatnonzero(rng.uniform(size=n_tags) < 0.4)))
        for n in range(n_items)
    ]
    query_tags = frozenset(int(t) for t in rng.choice(n_tags, size=int(rng.integers(0, 4)), replace=False))
    return items, Query(embedding=rng.normal(size=dim), tags=query_tags)


def test_top_item_survives_perturbations_below_its_margin():
    checked = 0
    for seed in range(200):
        rng = make_rng(seed)
        items, query = _random_scene(rng)
        alpha = float(rng.uniform(0.1, 1.0))
        ranked = rerank(query, items, alpha, top_k=len(items))
        (top_id, top_score), (_, runner_up) = ranked[0], ranked[1]
        margin = top_score - runner_up
        if margin <= 0:
            continue
        # a unit vector moved by delta changes its cosine with any unit query by at most 2 delta / (1 - delta)
        delta = 0.99 * margin / (2 * alpha + margin)
        perturbed = []
        for item in items:
            if item.id != top_id:
                direction = rng.normal(size=item.embedding.shape)
                item = GalleryItem(item.id, item.embedding + delta * direction / np.linalg.norm(direction), item.tags)
            perturbed.append(item)
        assert rerank(query, perturbed, alpha, top_k=1)[0][0] == top_id
        checked += 1
    assert checked >= 150


def test_scores_stay_in_bounds():
    for seed in range(200):
        rng = make_rng(seed)
        items, query = _random_scene(rng)
        alpha = float(rng.uniform(0.0, 1.0))
        for item in items:
            assert -1.0 - 1e-12 <= combined_score(query, item, alpha) <= 1.0 + 1e-12
        keywords = set(query.tags) or {0}
        assert all(0.0 <= score <= 1.0 for _, score in keyword_search(keywords, items, top_k=len(items)))

    opposite = _item("x", [1.0, 0.0], {5})
    assert combined_score(Query(embedding=np.array([-1.0, 0.0]), tags=frozenset({0})), opposite, 1.0) == pytest.approx(-1.0)
    assert combined_score(Query(embedding=np.array([-1.0, 0.0]), tags=frozenset({5})), opposite, 0.5) == pytest.approx(0.0)


def test_retrieval_task_targets_have_unique_tag_sets():
    task = make_retrieval_task(n_queries=10, n_items=100, seed=0)
    assert len({item.tags for item in task.gallery}) == 100
    assert all(len(query.tags) == 3 for query in task.queries)
    with pytest.raises(PreconditionError):
        make_retrieval_task(n_queries=10, n_items=5)
