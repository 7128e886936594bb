import numpy as np
import pytest

from tagmine.errors import DataError, PreconditionError, ShapeError
from tagmine.evalkit import ScoredPredictions, mean_ap, parse_grid, threshold_sweep
from tagmine.losskit import FocusParams, LabelMatrix, check_gradient
from tagmine.models import FeatureRecord, ImageTagSet, TagType
from tagmine.synthetic import make_tagging_corpus
from tagmine.tagger import (
    LinearTagger,
    check_vocab,
    init_tagger,
    join_training_data,
    load_model,
    loss_and_gradients,
    predict_batch,
    predict_logits,
    save_model,
    stack_features,
    threshold_tags,
    train,
    train_with_history,
)
from tagmine.vocab import TagVocabulary, VocabEntry


def _held_out(corpus, model):
    _, features = stack_features(corpus.test_features)
    truth = LabelMatrix.from_tag_sets([t.tags for t in corpus.test_labels], len(corpus.vocab)).values
    ids = [t.image_id for t in corpus.test_labels]
    return ScoredPredictions(ids, predict_batch(model, features), truth)


@pytest.fixture(scope="module")
def small_corpus():
    return make_tagging_corpus(n_tags=8, dim=16, sigma=0.1, n_train=200, n_test=50, seed=4, max_tags=3)


def test_trained_tagger_reaches_high_map(tagging_corpus, trained):
    model, _ = trained
    assert mean_ap(_held_out(tagging_corpus, model)) >= 0.95


def test_untrained_tagger_is_far_from_that(tagging_corpus):
    model = init_tagger(len(tagging_corpus.vocab), 64, seed=0)
    assert mean_ap(_held_out(tagging_corpus, model)) < 0.5


def test_training_loss_keeps_falling(trained):
    _, history = trained
    assert len(history) == 20
    assert history[-1] < history[0]
    for i in range(len(history) - 4):
        assert history[i + 4] <= history[i] * (1 + 1e-3)


def test_training_is_deterministic_per_seed(small_corpus):
    args = (small_corpus.train_features, small_corpus.train_labels, small_corpus.vocab)
    a = train(*args, epochs=3, seed=7)
    b = train(*args, epochs=3, seed=7)
    c = train(*args, epochs=3, seed=8)
    assert np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)
    assert not np.array_equal(a.weights, c.weights)


def test_zero_epochs_returns_the_initial_model(small_corpus):
    model, history = train_with_history(
        small_corpus.train_features, small_corpus.train_labels, small_corpus.vocab, epochs=0, seed=3,
    )
    assert history == []
    initial = init_tagger(len(small_corpus.vocab), 16, seed=3)
    assert np.array_equal(model.weights, initial.weights)
    assert np.all(model.bias == 0.0)
    assert model.vocab_hash == small_corpus.vocab.checksum()


@pytest.mark.parametrize("kwargs", [{"lr": 0.0}, {"epochs": -1}, {"batch_size": 0}])
def test_training_preconditions(small_corpus, kwargs):
    with pytest.raises(PreconditionError):
        train(small_corpus.train_features, small_corpus.train_labels, small_corpus.vocab, **kwargs)


def test_chained_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    model = init_tagger(5, 6, seed=1)
    model.bias = rng.normal(size=5)
    features = rng.normal(size=(4, 6))
    labels = LabelMatrix(rng.integers(0, 2, size=(4, 5)))
    focus = FocusParams(gamma_pos=1.0, gamma_neg=2.0)
    _, grad_w, grad_b = loss_and_gradients(model, features, labels, focus)

    def loss_of_weights(w):
        return loss_and_gradients(LinearTagger(w, model.bias, ""), features, labels, focus)[0]

    def loss_of_bias(b):
        return loss_and_gradients(LinearTagger(model.weights, b, ""), features, labels, focus)[0]

    assert check_gradient(loss_of_weights, model.weights, grad_w) < 1e-4
    assert check_gradient(loss_of_bias, model.bias, grad_b) < 1e-4


def test_join_training_data():
    features = [FeatureRecord(image_id="a", vector=[1.0, 0.0]), FeatureRecord(image_id="b", vector=[0.0, 1.0]),
                FeatureRecord(image_id="c", vector=[1.0, 1.0])]
    labels = [ImageTagSet(image_id="b", tags=[2]), ImageTagSet(image_id="a", tags=[0, 1])]
    matrix, label_matrix = join_training_data(features, labels, 3)
    assert matrix.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert label_matrix.values.tolist() == [[0, 0, 1], [1, 1, 0]]


@pytest.mark.parametrize("labels", [
    [ImageTagSet(image_id="missing", tags=[0])],
    [ImageTagSet(image_id="a", tags=[3])],
    [],
])
def test_join_training_data_errors(labels):
    with pytest.raises(DataError):
        join_training_data([FeatureRecord(image_id="a", vector=[1.0])], labels, 3)


def test_feature_dimensions_must_agree():
    with pytest.raises(DataError):
        stack_features([FeatureRecord(image_id="a", vector=[1.0]), FeatureRecord(image_id="b", vector=[1.0, 2.0])])


def test_predict_logits():
    model = LinearTagger(weights=np.array([[1.0, 0.0], [0.0, -1.0]]), bias=np.zeros(2), vocab_hash="")
    probs = predict_logits(model, FeatureRecord(image_id="x", vector=[2.0, 3.0]))
    assert probs == pytest.approx([1 / (1 + np.exp(-2.0)), 1 / (1 + np.exp(3.0))])
    assert np.array_equal(predict_logits(model, [2.0, 3.0]), probs)
    with pytest.raises(ShapeError):
        predict_logits(model, [1.0, 2.0, 3.0])


def test_threshold_tags_is_strict():
    assert threshold_tags([0.2, 0.5, 0.7], 0.5) == [2]
    assert threshold_tags([0.2, 0.5, 0.7], 0.0) == [0, 1, 2]
    assert threshold_tags([0.2, 0.5, 0.7], 1.0) == []
    with pytest.raises(PreconditionError):
        threshold_tags([0.5], 1.5)


def test_save_and_load_round_trip(tmp_path, trained):
    model, _ = trained
    path = tmp_path / "model.tsv"
    with open(path, "w", encoding="utf-8") as f:
        save_model(model, f)
    loaded = load_model(str(path))
    assert np.array_equal(loaded.weights, model.weights)
    assert np.array_equal(loaded.bias, model.bias)
    assert loaded.vocab_hash == model.vocab_hash


@pytest.mark.parametrize("lines", [
    [],
    ["weights"],
    ["C\td\tvocab_hash", "2\t1\tabc", "0.0\t1.0"],
    ["C\td\tvocab_hash", "1\t1\tabc", "0.0\tx"],
    ["C\td\tvocab_hash", "1\t1\tabc", "0.0\tnan"],
])
def test_load_rejects_malformed_models(write_lines, lines):
    with pytest.raises(DataError):
        load_model(write_lines("model.tsv", lines))


def test_model_must_match_vocabulary(tagging_corpus, trained):
    model, _ = trained
    check_vocab(model, tagging_corpus.vocab)
    check_vocab(model, None)
    other = TagVocabulary([VocabEntry(0, "dog", TagType.ENTITY, 1)])
    with pytest.raises(DataError):
        check_vocab(model, other)


def test_threshold_sweep_on_held_out_predictions(tagging_corpus, trained):
    model, _ = trained
    rows = threshold_sweep(_held_out(tagging_corpus, model), parse_grid("0.1:0.9:0.1"))
    assert [row.threshold for row in rows] == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    recalls = [row.recall for row in rows]
    assert recalls == sorted(recalls, reverse=True)
    assert rows[-1].n_predicted < rows[0].n_predicted
