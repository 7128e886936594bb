import json
from pathlib import Path

import pytest

from tagmine.synthetic import make_tagging_corpus
from tagmine.tagger import train_with_history

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def write_lines(tmp_path):
    """Write raw text lines to a file under tmp_path and return its path."""
    def write(name, lines):
        path = tmp_path / name
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def write_jsonl(write_lines):
    """Write objects as JSON lines and return the path."""
    def write(name, objects):
        return write_lines(name, [json.dumps(obj) for obj in objects])
    return write


@pytest.fixture
def write_models(tmp_path):
    """Write pydantic models as JSON lines and return the path."""
    def write(name, records):
        path = tmp_path / name
        path.write_text("".join(r.model_dump_json(exclude_none=True) + "\n" for r in records), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture(scope="session")
def tagging_corpus():
    return make_tagging_corpus(n_tags=32, dim=64, sigma=0.1, n_train=2000, n_test=500, seed=0)


@pytest.fixture(scope="session")
def trained(tagging_corpus):
    """(model, loss history) after the default training run on the synthetic corpus."""
    return train_with_history(
        tagging_corpus.train_features, tagging_corpus.train_labels, tagging_corpus.vocab, seed=0,
    )
