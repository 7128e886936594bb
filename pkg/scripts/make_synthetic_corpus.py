#!/usr/bin/env python3
"""
Write a synthetic corpus for trying the tagmine pipeline end to end.

Every image has a caption naming its tags and a feature vector built from
per-tag prototypes, so a trained tagger should recover the caption tags.

Files written to the output directory:
- corpus.jsonl      {"image_id", "text"} per caption
- features.jsonl    {"image_id", "vector"} per image
- gallery.jsonl     {"id", "vector", "tags"} for the held-out images

Usage:
    python scripts/make_synthetic_corpus.py --output-dir data/
    tagmine parse --input data/corpus.jsonl --output data/parsed.jsonl
    tagmine vocab build --input data/parsed.jsonl --output data/vocab.tsv --top-k 32
    tagmine labels --input data/parsed.jsonl --vocab data/vocab.tsv --output data/labels.jsonl
    tagmine train --input data/features.jsonl --labels data/labels.jsonl --vocab data/vocab.tsv --output data/model.tsv
"""

import os

import click
from dotenv import load_dotenv

from tagmine.jsonl import write_models
from tagmine.models import GalleryRecord
from tagmine.synthetic import make_tagging_corpus

# Load environment variables
load_dotenv()


@click.command()
@click.option('--output-dir', default='data', show_default=True, help='Directory for the generated files')
@click.option('--n-tags', default=32, show_default=True)
@click.option('--dim', default=64, show_default=True)
@click.option('--n-train', default=2000, show_default=True)
@click.option('--n-test', default=500, show_default=True)
@click.option('--seed', default=0, show_default=True)
def main(output_dir, n_tags, dim, n_train, n_test, seed):
    """Generate captions, features and a retrieval gallery."""
    corpus = make_tagging_corpus(n_tags=n_tags, dim=dim, n_train=n_train, n_test=n_test, seed=seed)
    os.makedirs(output_dir, exist_ok=True)

    def write(name, records):
        path = os.path.join(output_dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            count = write_models(f, records)
        click.echo(f"Wrote {count} records to {path}")

    write('corpus.jsonl', corpus.train_captions + corpus.test_captions)
    write('features.jsonl', corpus.train_features + corpus.test_features)
    write('gallery.jsonl', (
        GalleryRecord(id=f.image_id, vector=f.vector, tags=l.tags)
        for f, l in zip(corpus.test_features, corpus.test_labels)
    ))


if __name__ == "__main__":
    main()
