import json
import logging
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence

import click
import numpy as np
from dotenv import load_dotenv
from tqdm import tqdm

from .config import ConfigManager
from .corpus import aggregate_image_tags, parse_shard_spec, shuffle_tags, stream_records
from .errors import DataError, PreconditionError
from .evalkit import (
    ScoredPredictions,
    eval_caption_as_tagger,
    mean_ap,
    parse_grid,
    per_category_ap,
    prf_at_threshold,
    threshold_sweep,
)
from .jsonl import iter_lines, read_models, write_json_lines, write_models, write_tsv
from .losskit import KERNELS, FocusParams, format_report, gradcheck_suite
from .models import CaptionRecord, FeatureRecord, GalleryRecord, ImageTagSet, ParsedCaption, PredictionRecord, TagType
from .rerank import Gallery, keyword_search, keywords_to_ids, query_from_text, rerank as rerank_gallery
from .semparse import PARSER_MODES, parse_caption, project_tags
from .tagger import check_vocab, load_model, predict_batch, save_model, stack_features, threshold_tags, train_with_history
from .vocab import TagVocabulary, build_vocab, corpus_stats, count_parsed_files, load_allowlist, load_synonyms, vocab_overlap

# Load environment variables from a .env file
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _progress(iterable: Iterable, desc: str) -> Iterable:
    return tqdm(iterable, desc=desc, unit=" lines", disable=not sys.stderr.isatty())


def _default_map(command: click.Command, knobs: Dict[str, Any]) -> Dict[str, Any]:
    """Nested click default_map giving every subcommand the configured knob values."""
    if isinstance(command, click.Group):
        return {name: _default_map(sub, knobs) for name, sub in command.commands.items()}
    names = {param.name for param in command.params}
    return {key: value for key, value in knobs.items() if key in names}


def _shard_option(ctx, param, value):
    try:
        return parse_shard_spec(value)
    except PreconditionError as e:
        raise click.BadParameter(str(e)) from e


def _load_vocab(path: Optional[str]) -> Optional[TagVocabulary]:
    return TagVocabulary.load(path) if path else None


def _load_categories(path: Optional[str], vocab: Optional[TagVocabulary]) -> Optional[List[int]]:
    """Category subset file: one id or (with a vocabulary) one tag name per line."""
    if not path:
        return None
    ids = []
    for number, line in iter_lines(path):
        name = line.strip()
        if not name:
            continue
        if name.isdigit():
            ids.append(int(name))
            continue
        tag_id = vocab.id_of(name) if vocab is not None else None
        if tag_id is None:
            raise DataError(f"{path}:{number}: unknown category '{name}'")
        ids.append(tag_id)
    return ids


def _category_name(vocab: Optional[TagVocabulary], tag_id: int) -> str:
    if vocab is not None and tag_id < len(vocab):
        return vocab.canonical(tag_id)
    return str(tag_id)


def _prf_rows(report) -> List[Sequence[object]]:
    return [
        ("micro_precision", "-", report.micro.precision),
        ("micro_recall", "-", report.micro.recall),
        ("micro_f1", "-", report.micro.f1),
        ("macro_precision", "-", report.macro.precision),
        ("macro_recall", "-", report.macro.recall),
        ("macro_f1", "-", report.macro.f1),
    ]


@click.group()
@click.option('--log-level',
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'], case_sensitive=False),
              default='WARNING',
              help='Set logging level (logs go to stderr)')
@click.pass_context
def main(ctx, log_level):
    """tagmine - from image-text corpora to tag vocabularies, tagging losses, evaluation and tag-guided retrieval."""
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, log_level.upper()), format=LOG_FORMAT)
    config = ConfigManager()
    knobs = config.as_dict()
    knobs["instances"] = config.get("gradcheck_instances")
    ctx.obj = config.defaults
    ctx.default_map = _default_map(ctx.command, knobs)


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Corpus JSON lines: {"image_id", "text"} per line')
@click.option('--output', default='-', type=click.Path(dir_okay=False), help='Parsed captions (default: stdout)')
@click.option('--mode', type=click.Choice(PARSER_MODES), default='builtin', help='Caption parser')
@click.option('--sidecar', type=click.Path(exists=True, dir_okay=False), help='External parses for --mode external')
@click.option('--shard', default='0/1', callback=_shard_option, help='Process only lines with line % N == I (I/N)')
def parse(input_path, output, mode, sidecar, shard):
    """Parse captions into heads, modifiers, relations and tags."""
    if mode == 'external' and not sidecar:
        raise click.UsageError("--mode external needs --sidecar")

    def parsed():
        for line, record in _progress(stream_records(input_path, shard), "parse"):
            if not isinstance(record, CaptionRecord):
                continue
            result = parse_caption(record.text, mode=mode, sidecar=sidecar, line=line)
            yield ParsedCaption(line=line, image_id=record.image_id, text=record.text,
                                parse=result, tags=project_tags(result))

    with click.open_file(output, 'w', encoding='utf-8') as out:
        count = write_models(out, parsed())
    click.echo(f"Parsed {count} captions", err=True)


@main.group()
def vocab():
    """Build and query tag vocabularies."""
    pass


@vocab.command('build')
@click.option('--input', 'input_paths', required=True, multiple=True, type=click.Path(exists=True, dir_okay=False),
              help='Parsed captions from `parse`; repeat once per shard file')
@click.option('--output', default='-', type=click.Path(dir_okay=False), help='Vocabulary TSV (default: stdout)')
@click.option('--top-k', type=click.IntRange(min=1), default=5000, show_default=True,
              help='Most frequent canonicals kept before the allow/deny list')
@click.option('--min-freq', type=click.IntRange(min=1), default=1, show_default=True, help='Minimum tag frequency')
@click.option('--synonyms', type=click.Path(exists=True, dir_okay=False), help='surface<TAB>canonical table')
@click.option('--allowlist', type=click.Path(exists=True, dir_okay=False),
              help="Allow/deny list; lines starting with '-' deny")
def vocab_build(input_paths, output, top_k, min_freq, synonyms, allowlist):
    """Build a ranked, typed, synonym-merged tag vocabulary."""
    freqs = count_parsed_files(input_paths)
    table = load_synonyms(synonyms) if synonyms else None
    lists = load_allowlist(allowlist) if allowlist else None
    result = build_vocab(freqs, top_k=top_k, synonym_table=table, min_freq=min_freq, allowlist=lists)
    with click.open_file(output, 'w', encoding='utf-8') as out:
        result.save(out)
    counts = result.type_counts()
    click.echo(
        f"Vocabulary: {len(result)} tags ("
        + ", ".join(f"{t.value} {counts[t]}" for t in TagType) + ")",
        err=True,
    )


@vocab.command('overlap')
@click.option('--vocab', 'vocab_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='External category list, one name per line')
@click.option('--type', 'tag_type', type=click.Choice([t.value for t in TagType]), help='Only count this tag type')
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def vocab_overlap_command(vocab_path, input_path, tag_type, output):
    """List the vocabulary categories an external category list covers."""
    tags = TagVocabulary.load(vocab_path)
    external = [line.strip() for _, line in iter_lines(input_path) if line.strip()]
    count, overlapping = vocab_overlap(tags, external, TagType(tag_type) if tag_type else None)
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_tsv(out, ("id", "canonical", "type"),
                  ((tags.id_of(c), c, tags.entries[tags.id_of(c)].type.value) for c in overlapping))
    click.echo(f"{count} of {len(external)} external categories overlap", err=True)


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Parsed captions from `parse`')
@click.option('--vocab', 'vocab_path', type=click.Path(exists=True, dir_okay=False),
              help='Also report category counts per type')
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def stats(input_path, vocab_path, output):
    """Corpus statistics: images, texts, tags and their per-image averages."""
    parsed = read_models(input_path, ParsedCaption)
    result = corpus_stats(
        (CaptionRecord(image_id=p.image_id, text=p.text) for p in parsed),
        (p.tags for p in parsed),
    )
    rows = [
        ("n_images", result.n_images),
        ("n_texts", result.n_texts),
        ("avg_texts_per_image", f"{result.avg_texts_per_image:.2f}"),
        ("n_tags", result.n_tags),
        ("avg_tags_per_image", f"{result.avg_tags_per_image:.2f}"),
    ]
    tags = _load_vocab(vocab_path)
    if tags is not None:
        counts = tags.type_counts()
        rows.append(("n_categories", len(tags)))
        rows.extend((f"n_{t.value}_categories", counts[t]) for t in TagType)
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_tsv(out, ("statistic", "value"), rows)


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Parsed captions from `parse`')
@click.option('--vocab', 'vocab_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--output', default='-', type=click.Path(dir_okay=False), help='Per-image tag sets')
def labels(input_path, vocab_path, output):
    """Union the vocabulary tags of every caption per image."""
    tags = TagVocabulary.load(vocab_path)
    parsed = read_models(input_path, ParsedCaption)
    tag_sets = aggregate_image_tags((p.image_id, tags.resolve(p.tags)) for p in parsed)
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_models(out, tag_sets)
    click.echo(f"Labelled {len(tag_sets)} images", err=True)


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Feature JSON lines: {"image_id", "vector"}')
@click.option('--labels', 'labels_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Per-image tag sets from `labels`')
@click.option('--vocab', 'vocab_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--output', default='-', type=click.Path(dir_okay=False), help='Model TSV')
@click.option('--gamma-pos', type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option('--gamma-neg', type=click.FloatRange(min=0), default=4.0, show_default=True)
@click.option('--lr', type=click.FloatRange(min=0, min_open=True), default=0.5, show_default=True)
@click.option('--epochs', type=click.IntRange(min=0), default=20, show_default=True)
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.pass_obj
def train(defaults, input_path, labels_path, vocab_path, output, gamma_pos, gamma_neg, lr, epochs, seed):
    """Train a linear tagger with the asymmetric loss."""
    tags = TagVocabulary.load(vocab_path)
    model, history = train_with_history(
        read_models(input_path, FeatureRecord),
        read_models(labels_path, ImageTagSet),
        tags,
        focus=FocusParams(gamma_pos=gamma_pos, gamma_neg=gamma_neg),
        lr=lr,
        epochs=epochs,
        seed=seed,
        batch_size=defaults.batch_size,
    )
    with click.open_file(output, 'w', encoding='utf-8') as out:
        save_model(model, out)
    if history:
        click.echo(f"Final training loss {history[-1]:.6f}", err=True)


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Feature JSON lines')
@click.option('--model', 'model_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--vocab', 'vocab_path', type=click.Path(exists=True, dir_okay=False),
              help='Check the model against this vocabulary')
@click.option('--threshold', type=click.FloatRange(0, 1), default=0.5, show_default=True)
@click.option('--binary', is_flag=True, help='Write thresholded tag ids instead of scores')
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def predict(input_path, model_path, vocab_path, threshold, binary, output):
    """Score images with a trained tagger."""
    model = load_model(model_path)
    check_vocab(model, _load_vocab(vocab_path))
    ids, features = stack_features(read_models(input_path, FeatureRecord))
    probs = predict_batch(model, features) if ids else np.zeros((0, model.n_categories))
    if binary:
        records = (PredictionRecord(image_id=i, tags=threshold_tags(p, threshold)) for i, p in zip(ids, probs))
    else:
        records = (PredictionRecord(image_id=i, scores=p.tolist()) for i, p in zip(ids, probs))
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_models(out, records)


@main.group('eval')
def eval_group():
    """Evaluate tagging, captions as taggers, and threshold sweeps."""
    pass


def _scored(input_path: str, labels_path: str, vocab: Optional[TagVocabulary]) -> ScoredPredictions:
    return ScoredPredictions.from_records(
        read_models(input_path, PredictionRecord),
        read_models(labels_path, ImageTagSet),
        n_categories=len(vocab) if vocab is not None else None,
    )


@eval_group.command('tagging')
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Predictions from `predict`')
@click.option('--labels', 'labels_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Ground-truth tag sets')
@click.option('--vocab', 'vocab_path', type=click.Path(exists=True, dir_okay=False), help='Name categories')
@click.option('--categories', type=click.Path(exists=True, dir_okay=False), help='Evaluate only these categories')
@click.option('--threshold', type=click.FloatRange(0, 1), default=0.5, show_default=True)
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def eval_tagging(input_path, labels_path, vocab_path, categories, threshold, output):
    """mAP, per-category AP and P/R/F1 at a threshold."""
    tags = _load_vocab(vocab_path)
    preds = _scored(input_path, labels_path, tags)
    subset = _load_categories(categories, tags)
    rows: List[Sequence[object]] = [("mAP", "-", mean_ap(preds, subset))]
    rows.extend(("AP", _category_name(tags, c), ap) for c, ap in per_category_ap(preds, subset))
    rows.extend(_prf_rows(prf_at_threshold(preds, threshold, subset)))
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_tsv(out, ("metric", "category", "value"), rows)


@eval_group.command('caption')
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Captions as corpus JSON lines')
@click.option('--labels', 'labels_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--vocab', 'vocab_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--mode', type=click.Choice(PARSER_MODES), default='builtin')
@click.option('--sidecar', type=click.Path(exists=True, dir_okay=False))
@click.option('--categories', type=click.Path(exists=True, dir_okay=False))
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def eval_caption(input_path, labels_path, vocab_path, mode, sidecar, categories, output):
    """Score captions as tag predictions through parsing and synonym resolution."""
    if mode == 'external' and not sidecar:
        raise click.UsageError("--mode external needs --sidecar")
    tags = TagVocabulary.load(vocab_path)
    captions = read_models(input_path, CaptionRecord)
    report = eval_caption_as_tagger(
        captions, read_models(labels_path, ImageTagSet), tags,
        mode=mode, sidecar=sidecar, categories=_load_categories(categories, tags),
    )
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_tsv(out, ("metric", "category", "value"), _prf_rows(report))


@eval_group.command('sweep')
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--labels', 'labels_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--vocab', 'vocab_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--categories', type=click.Path(exists=True, dir_okay=False))
@click.option('--sweep', default='0.1:0.9:0.1', show_default=True, help='Thresholds START:STOP:STEP')
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def eval_sweep(input_path, labels_path, vocab_path, categories, sweep, output):
    """Micro precision/recall/F1 across a threshold grid."""
    grid = parse_grid(sweep)
    tags = _load_vocab(vocab_path)
    preds = _scored(input_path, labels_path, tags)
    curve = threshold_sweep(preds, grid, _load_categories(categories, tags))
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_tsv(out, ("threshold", "precision", "recall", "f1", "n_predicted"),
                  ((f"{r.threshold:g}", r.precision, r.recall, r.f1, r.n_predicted) for r in curve))


def _read_embedding(path: str) -> List[float]:
    """A JSON list of numbers, or a JSON object with a "vector" list."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: not valid JSON ({e.msg})") from e
    vector = data.get("vector") if isinstance(data, dict) else data
    if not isinstance(vector, list) or not vector or not all(isinstance(x, (int, float)) for x in vector):
        raise DataError(f"{path}: expected a list of numbers or an object with a 'vector' list")
    return [float(x) for x in vector]


def _write_ranking(output: str, ranked):
    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_tsv(out, ("rank", "id", "score"), ((i + 1, item_id, score) for i, (item_id, score) in enumerate(ranked)))


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Gallery JSON lines: {"id", "vector", "tags"}')
@click.option('--query', required=True, help='Query text; its parsed tags are matched against item tags')
@click.option('--vocab', 'vocab_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--embedding', type=click.Path(exists=True, dir_okay=False), help='Query embedding (JSON list)')
@click.option('--alpha', type=click.FloatRange(0, 1), default=0.8, show_default=True,
              help='Weight of embedding similarity against tag overlap')
@click.option('--topk', type=click.IntRange(min=1), default=10, show_default=True)
@click.option('--mode', type=click.Choice(['builtin']), default='builtin', help='Query parser')
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def rerank(input_path, query, vocab_path, embedding, alpha, topk, mode, output):
    """Rank a gallery by embedding similarity and shared tags."""
    tags = TagVocabulary.load(vocab_path)
    vector = _read_embedding(embedding) if embedding else None
    q = query_from_text(query, tags, embedding=vector, mode=mode)
    gallery = Gallery.from_records(read_models(input_path, GalleryRecord))
    _write_ranking(output, rerank_gallery(q, gallery, alpha, topk))


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Gallery JSON lines')
@click.option('--keywords', required=True, help='Comma-separated tag names (with --vocab) or ids')
@click.option('--vocab', 'vocab_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--topk', type=click.IntRange(min=1), default=10, show_default=True)
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def search(input_path, keywords, vocab_path, topk, output):
    """Rank a gallery by the fraction of keywords among item tags."""
    words = [w.strip() for w in keywords.split(',') if w.strip()]
    tags = _load_vocab(vocab_path)
    if tags is not None:
        ids = keywords_to_ids(words, tags)
    else:
        if not all(w.isdigit() for w in words):
            raise click.BadParameter("keywords must be tag ids unless --vocab is given", param_hint="--keywords")
        ids = sorted({int(w) for w in words})
    gallery = Gallery.from_records(read_models(input_path, GalleryRecord))
    _write_ranking(output, keyword_search(ids, gallery, topk))


@main.command()
@click.option('--loss', 'losses', multiple=True, type=click.Choice(KERNELS + ('all',)), default=('all',),
              show_default=True, help='Kernel to check; repeatable')
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.option('--instances', type=click.IntRange(min=1), default=100, show_default=True,
              help='Random instances per kernel')
@click.option('--gamma-pos', type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option('--gamma-neg', type=click.FloatRange(min=0), default=4.0, show_default=True)
@click.option('--temperature', type=click.FloatRange(min=0, min_open=True), default=0.07, show_default=True)
def gradcheck(losses, seed, instances, gamma_pos, gamma_neg, temperature):
    """Check analytic loss gradients against central finite differences."""
    kernels = KERNELS if 'all' in losses else tuple(dict.fromkeys(losses))
    rows = gradcheck_suite(
        kernels, instances=instances, seed=seed,
        focus=FocusParams(gamma_pos=gamma_pos, gamma_neg=gamma_neg), temperature=temperature,
    )
    click.echo(format_report(rows), nl=False)
    return EXIT_OK if all(row.passed for row in rows) else EXIT_DATA


@main.command()
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Per-image tag sets')
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.option('--output', default='-', type=click.Path(dir_okay=False))
def shuffle(input_path, seed, output):
    """Rearrange each image's tags with a seeded Fisher-Yates shuffle."""
    def shuffled():
        for line, tag_set in enumerate(read_models(input_path, ImageTagSet)):
            line_seed = int(np.random.SeedSequence([seed, line]).generate_state(1)[0])
            yield {"image_id": tag_set.image_id, "tags": shuffle_tags(tag_set.tags, line_seed)}

    with click.open_file(output, 'w', encoding='utf-8') as out:
        write_json_lines(out, shuffled())


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line and return its exit code instead of exiting.

    Returns:
        0 on success, 1 on a usage or precondition error, 2 on a data error.
    """
    try:
        result = main.main(args=list(argv) if argv is not None else None, prog_name="tagmine",
                           standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except PreconditionError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    except (DataError, OSError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_DATA
    return result if isinstance(result, int) else EXIT_OK


def entrypoint():
    sys.exit(run())


if __name__ == "__main__":
    entrypoint()
