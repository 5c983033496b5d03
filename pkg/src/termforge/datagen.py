"""Weak-label dataset materialization: annotate a raw corpus, emit IOB files.

Inputs are CoNLL files (pre-tokenized, ideally with a POS column) or plain
text with one sentence per line.  A seeded reservoir sample of the eligible
sentences is annotated and written out together with a JSON report of label
statistics.  Everything downstream of the seed is deterministic.
"""

from __future__ import annotations

import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from . import postag
from .annotator import AnnotatorConfig, annotate_document
from .corpus import Sentence, Token, format_conll, parse_conll
from .embeddings import EmbeddingBackend
from .postag import PosModel
from .subword import SubwordVocab

log = logging.getLogger(__name__)


class GenerationError(RuntimeError):
    """Dataset generation could not produce any output."""


_TERMINAL_PUNCT = ".,;:!?"
_OPENERS = "([{\"'“‘«"
_CLOSERS = ")]}\"'”’»"


def tokenize_line(line: str) -> List[str]:
    """Whitespace tokenization with terminal punctuation and paired
    brackets/quotes split into their own tokens."""
    tokens: List[str] = []
    for chunk in line.split():
        leading: List[str] = []
        while chunk and chunk[0] in _OPENERS:
            leading.append(chunk[0])
            chunk = chunk[1:]
        trailing: List[str] = []
        while chunk and (chunk[-1] in _TERMINAL_PUNCT or chunk[-1] in _CLOSERS):
            trailing.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(leading)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trailing))
    return tokens


def reservoir_sample(items: Iterable, k: int, rng: random.Random) -> List:
    """Uniform sample of k items (all, if fewer), returned in input order."""
    reservoir: List[Tuple[int, object]] = []
    for i, item in enumerate(items):
        if i < k:
            reservoir.append((i, item))
        else:
            j = rng.randint(0, i)
            if j < k:
                reservoir[j] = (i, item)
    reservoir.sort(key=lambda pair: pair[0])
    return [item for _, item in reservoir]


@dataclass
class GenerationOptions:
    sample_size: Optional[int] = None
    seed: int = 0
    dedup: bool = False
    min_sentence_len: int = 3
    max_sentence_len: int = 200
    threads: int = 1
    input_format: str = "auto"  # auto | conll | text


@dataclass
class GenerationReport:
    sentences: int = 0
    tokens: int = 0
    terms: int = 0
    label_counts: dict = field(default_factory=lambda: {"B": 0, "I": 0, "O": 0})
    source_counts: dict = field(default_factory=dict)
    input_sentences: int = 0
    dropped_short: int = 0
    dropped_long: int = 0
    duplicates_removed: int = 0
    annotation_errors: int = 0
    seed: int = 0
    wall_clock_s: float = 0.0

    def to_json(self) -> dict:
        return dict(vars(self))


def _detect_format(path: Path, declared: str) -> str:
    if declared != "auto":
        return declared
    if path.suffix.lower() in (".conll", ".iob", ".bio", ".tsv"):
        return "conll"
    return "text"


def _read_inputs(paths: Sequence[Union[str, Path]], input_format: str) -> Tuple[List[Sentence], List[bool]]:
    """Returns sentences plus a parallel needs-tagging flag (true for raw text)."""
    sentences: List[Sentence] = []
    needs_pos: List[bool] = []
    for raw_path in paths:
        path = Path(raw_path)
        fmt = _detect_format(path, input_format)
        if fmt == "conll":
            parsed = parse_conll(path)
            for s in parsed.sentences:
                sentences.append(s)
                needs_pos.append(False)
        elif fmt == "text":
            with open(path, encoding="utf-8") as f:
                for line in f:
                    tokens = tokenize_line(line)
                    if not tokens:
                        continue
                    sentences.append(Sentence(tuple(Token(t) for t in tokens)))
                    needs_pos.append(True)
        else:
            raise ValueError(f"unknown input format {fmt!r}")
    return sentences, needs_pos


def generate(
    input_paths: Sequence[Union[str, Path]],
    backend: EmbeddingBackend,
    vocab: SubwordVocab,
    output_path: Union[str, Path],
    config: AnnotatorConfig = AnnotatorConfig(),
    options: GenerationOptions = GenerationOptions(),
    pos_model: Optional[PosModel] = None,
    report_path: Optional[Union[str, Path]] = None,
) -> GenerationReport:
    """Sample, annotate, and write a weak-label IOB training file.

    Order of operations: read, length-filter, dedup (optional), seeded
    reservoir sample, POS-tag raw-text sentences, annotate, write.  Output
    sentence order equals input-sample order regardless of worker count.
    """
    started = time.perf_counter()
    report = GenerationReport(seed=options.seed)

    pairs = list(zip(*_read_inputs(input_paths, options.input_format))) or []
    report.input_sentences = len(pairs)
    if any(needs for _, needs in pairs) and pos_model is None:
        raise GenerationError("plain-text input requires a POS model (see train-pos)")

    kept: List[Tuple[Sentence, bool]] = []
    seen = set()
    for sentence, needs in pairs:
        n = len(sentence)
        if n < options.min_sentence_len:
            report.dropped_short += 1
            continue
        if n > options.max_sentence_len:
            report.dropped_long += 1
            continue
        if options.dedup:
            key = sentence.surfaces
            if key in seen:
                report.duplicates_removed += 1
                continue
            seen.add(key)
        kept.append((sentence, needs))

    if options.sample_size is not None:
        if options.sample_size > len(kept):
            log.warning(
                "sample_size %d exceeds eligible corpus size %d; capping",
                options.sample_size,
                len(kept),
            )
        rng = random.Random(options.seed)
        kept = reservoir_sample(kept, options.sample_size, rng)

    sentences: List[Sentence] = []
    for i, (sentence, needs) in enumerate(kept):
        if needs:
            sentence = postag.apply_lemmas(postag.tag(sentence, pos_model))
        sentences.append(Sentence(sentence.tokens, id=f"s{i}"))

    if not sentences:
        raise GenerationError("no sentences survived filtering")

    if options.threads > 1:
        with ThreadPoolExecutor(max_workers=options.threads) as pool:
            result = annotate_document(sentences, backend, vocab, config, map_fn=pool.map)
    else:
        result = annotate_document(sentences, backend, vocab, config)

    out_sentences: List[Sentence] = []
    out_spans = []
    for sentence, annotation in zip(sentences, result.annotations):
        if annotation.error:
            report.annotation_errors += 1
            log.error("sentence %s failed: %s", annotation.sentence_id, annotation.error)
            continue
        out_sentences.append(sentence)
        out_spans.append(annotation.spans)
        report.sentences += 1
        report.tokens += len(sentence)
        report.terms += len(annotation.spans)
        for span in annotation.spans:
            report.label_counts["B"] += 1
            report.label_counts["I"] += span.end - span.start - 1
        for audit in annotation.audits:
            if audit.decision == "kept":
                report.source_counts[audit.source] = report.source_counts.get(audit.source, 0) + 1
    report.label_counts["O"] = report.tokens - report.label_counts["B"] - report.label_counts["I"]

    if not out_sentences:
        raise GenerationError("every sampled sentence failed annotation")

    Path(output_path).write_text(format_conll(out_sentences, out_spans), encoding="utf-8")
    report.wall_clock_s = time.perf_counter() - started
    if report_path is not None:
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(report.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")
    return report
