"""Command-line operator surface.

Subcommands map 1:1 onto the library: annotate, generate, train-pos,
tag-pos, train-tagger, tag, eval, bench.  Annotator settings resolve as
CLI flag > TERMFORGE_* env var > config file > built-in default, and every
run prints a reproducibility header (version, config hash, seed) to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence

from . import __version__, bench as bench_mod, datagen, postag, tagger
from .annotator import AnnotatorConfig, annotate_document, annotate_sentence, write_audit_jsonl
from .corpus import UNKNOWN, format_conll, parse_conll
from .embeddings import EmbeddingBackend, RemoteBackend, load_static_vectors
from .evaluate import evaluate_corpora, write_report as write_eval_report
from .subword import load_vocab

log = logging.getLogger("termforge")

ENV_PREFIX = "TERMFORGE_"

_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(AnnotatorConfig)}


def _coerce(name: str, raw: str):
    kind = _CONFIG_FIELDS[name].type
    if kind in ("float", float):
        return float(raw)
    if kind in ("int", int):
        return int(raw)
    return raw


def load_config_file(path: Path) -> Dict[str, str]:
    """Flat ``key = value`` file; '#' starts a comment, quotes are optional."""
    values: Dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip().strip("\"'")
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
        values[key] = value
    return values


def resolve_config(args: argparse.Namespace) -> AnnotatorConfig:
    import os

    values: Dict[str, object] = {}
    config_path = getattr(args, "config", None)
    if config_path:
        for key, raw in load_config_file(Path(config_path)).items():
            values[key] = _coerce(key, raw)
    for name in _CONFIG_FIELDS:
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw)
    for name in _CONFIG_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return AnnotatorConfig(**values)


def _print_header(args: argparse.Namespace, config: Optional[AnnotatorConfig]) -> None:
    payload = {
        "command": args.command,
        "config": dataclasses.asdict(config) if config else None,
        "seed": args.seed,
    }
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()[:12]
    print(
        f"termforge {__version__} | command={args.command} seed={args.seed} config={digest}",
        file=sys.stderr,
    )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("annotator settings")
    group.add_argument("--t-topic", dest="t_topic", type=float)
    group.add_argument("--t-sp", dest="t_sp", type=float)
    group.add_argument("--t-morph", dest="t_morph", type=int)
    group.add_argument("--morph-comparison", dest="morph_comparison", choices=["ge", "gt"])
    group.add_argument(
        "--specificity-mode", dest="specificity_mode", choices=["similarity", "distance"]
    )
    group.add_argument(
        "--head-match-scope", dest="head_match_scope", choices=["sentence", "document", "corpus"]
    )
    group.add_argument(
        "--context-unit-policy",
        dest="context_unit_policy",
        choices=["content-words", "all-tokens"],
    )
    group.add_argument(
        "--head-lemma-source", dest="head_lemma_source", choices=["surviving", "all-candidates"]
    )
    group.add_argument("--sp-when-no-context", dest="sp_when_no_context", type=float)


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--vectors", help="static word-vector file (GloVe-style)")
    group.add_argument("--remote", help="base URL of the embedding sidecar")


def _make_backend(args: argparse.Namespace, cache_enabled: bool = True) -> EmbeddingBackend:
    if args.vectors:
        return load_static_vectors(args.vectors, cache_enabled=cache_enabled)
    return RemoteBackend(args.remote, cache_enabled=cache_enabled)


def _maybe_pos_tag(corpus, pos_model_path: Optional[str]):
    """Fill POS/lemma on sentences that carry none, when a model is given."""
    sentences = corpus.sentences
    untagged = [s for s in sentences if all(t.pos == UNKNOWN for t in s.tokens)]
    if not untagged:
        return sentences
    if pos_model_path is None:
        raise ValueError(
            "input has sentences without a POS column; pass --pos-model or tag the file first"
        )
    model = postag.load_pos(pos_model_path)
    out = []
    for s in sentences:
        if all(t.pos == UNKNOWN for t in s.tokens):
            s = postag.apply_lemmas(postag.tag(s, model))
        out.append(s)
    return out


def _cmd_annotate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    _print_header(args, config)
    backend = _make_backend(args)
    vocab = load_vocab(args.subword_vocab)
    corpus = parse_conll(args.infile)
    sentences = _maybe_pos_tag(corpus, args.pos_model)
    result = annotate_document(sentences, backend, vocab, config)
    n_audits = write_audit_jsonl(args.out, result.audits())
    iob_out = args.iob_out or str(Path(args.out).with_suffix(".conll"))
    kept = [
        (s, a.spans) for s, a in zip(sentences, result.annotations) if a.error is None
    ]
    Path(iob_out).write_text(
        format_conll([s for s, _ in kept], [sp for _, sp in kept]), encoding="utf-8"
    )
    n_spans = sum(len(sp) for _, sp in kept)
    print(f"{len(kept)} sentences, {n_spans} term spans, {n_audits} audit records")
    for sid, message in result.errors:
        log.error("sentence %s: %s", sid, message)
    return 1 if result.errors else 0


def _cmd_generate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    _print_header(args, config)
    backend = _make_backend(args)
    vocab = load_vocab(args.subword_vocab)
    options = datagen.GenerationOptions(
        sample_size=args.sample_size,
        seed=args.seed,
        dedup=args.dedup,
        min_sentence_len=args.min_len,
        max_sentence_len=args.max_len,
        threads=args.threads,
        input_format=args.format,
    )
    pos_model = postag.load_pos(args.pos_model) if args.pos_model else None
    report = datagen.generate(
        args.infiles,
        backend,
        vocab,
        args.out,
        config=config,
        options=options,
        pos_model=pos_model,
        report_path=args.report,
    )
    print(
        f"wrote {report.sentences} sentences, {report.terms} terms "
        f"({report.annotation_errors} errors) in {report.wall_clock_s:.1f}s"
    )
    return 1 if report.annotation_errors else 0


def _cmd_train_pos(args: argparse.Namespace) -> int:
    _print_header(args, None)
    corpus = parse_conll(args.infile)
    model = postag.train_pos(
        corpus.sentences, epochs=args.epochs, seed=args.seed, holdout_fraction=args.holdout
    )
    postag.save_pos(model, args.out)
    accuracy = model.meta.get("holdout_accuracy")
    print(
        f"trained on {len(corpus.sentences)} sentences; held-out accuracy: "
        + (f"{accuracy:.4f}" if accuracy is not None else "n/a")
    )
    return 0


def _cmd_tag_pos(args: argparse.Namespace) -> int:
    _print_header(args, None)
    model = postag.load_pos(args.model)
    if args.format == "text":
        sentences = []
        with open(args.infile, encoding="utf-8") as f:
            for line in f:
                tokens = datagen.tokenize_line(line)
                if tokens:
                    from .corpus import Sentence, Token

                    sentences.append(Sentence(tuple(Token(t) for t in tokens)))
    else:
        sentences = parse_conll(args.infile).sentences
    tagged = [postag.apply_lemmas(postag.tag(s, model)) for s in sentences]
    Path(args.out).write_text(format_conll(tagged), encoding="utf-8")
    print(f"tagged {len(tagged)} sentences")
    return 0


def _cmd_train_tagger(args: argparse.Namespace) -> int:
    _print_header(args, None)
    corpus = parse_conll(args.infile)
    if corpus.gold_spans is None:
        raise ValueError("training file must carry an IOB label column")
    vocab = load_vocab(args.subword_vocab)
    model = tagger.train_tagger(
        corpus.sentences,
        corpus.gold_spans,
        vocab,
        epochs=args.epochs,
        seed=args.seed,
        holdout_fraction=args.holdout,
        hash_dim=args.hash_dim,
    )
    size = tagger.save_tagger(model, args.out)
    print(
        f"trained on {model.meta['n_train']} sentences; "
        f"held-out partial F1 {model.meta.get('holdout_partial_f1', float('nan')):.4f}; "
        f"model file {size / 1e6:.2f} MB"
    )
    return 0


def _cmd_tag(args: argparse.Namespace) -> int:
    _print_header(args, None)
    model = tagger.load_tagger(args.model)
    corpus = parse_conll(args.infile)
    spans = [tagger.predict(s, model)[1] for s in corpus.sentences]
    Path(args.out).write_text(format_conll(corpus.sentences, spans), encoding="utf-8")
    print(f"tagged {len(corpus.sentences)} sentences, {sum(map(len, spans))} spans")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    _print_header(args, None)
    report = evaluate_corpora(
        parse_conll(args.pred), parse_conll(args.gold), per_sentence=args.per_sentence
    )
    print(report.to_text())
    if args.out:
        write_eval_report(args.out, report)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    _print_header(args, config)
    corpus = parse_conll(args.infile)
    if args.system == "student":
        model = tagger.load_tagger(args.model)
        system_fn = lambda s: tagger.predict(s, model)  # noqa: E731
    else:
        # embedding cache off: the repeated-encoder cost is what the
        # student/annotator split removes at inference time
        backend = _make_backend(args, cache_enabled=False)
        vocab = load_vocab(args.subword_vocab)
        system_fn = lambda s: annotate_sentence(s, backend, vocab, config)  # noqa: E731
    report = bench_mod.bench_latency(
        system_fn,
        corpus.sentences,
        warmup_n=args.warmup,
        measure_n=args.measure_n,
        repetitions=args.repetitions,
    )
    print(
        f"{args.system}: mean {report.mean_ms:.3f} ms  p50 {report.p50_ms:.3f}  "
        f"p95 {report.p95_ms:.3f}  p99 {report.p99_ms:.3f}  (k={report.k_loop})"
    )
    if args.out:
        bench_mod.write_report(args.out, report)
    if args.csv:
        bench_mod.write_samples_csv(args.csv, report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="termforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"termforge {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value settings file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--log-level", default="WARNING")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", parents=[common], help="run the unsupervised annotator")
    p.add_argument("--in", dest="infile", required=True)
    _add_backend_flags(p)
    p.add_argument("--subword-vocab", required=True)
    p.add_argument("--pos-model")
    p.add_argument("--out", required=True, help="audit JSONL path")
    p.add_argument("--iob-out", help="labeled CoNLL path (default: --out with .conll)")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("generate", parents=[common], help="materialize a weak-label dataset")
    p.add_argument("--in", dest="infiles", nargs="+", required=True)
    p.add_argument("--format", choices=["auto", "conll", "text"], default="auto")
    _add_backend_flags(p)
    p.add_argument("--subword-vocab", required=True)
    p.add_argument("--pos-model")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=200)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train-pos", parents=[common], help="train the POS tagger")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--holdout", type=float, default=0.1)
    p.set_defaults(func=_cmd_train_pos)

    p = sub.add_parser("tag-pos", parents=[common], help="POS-tag a file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=["conll", "text"], default="conll")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tag_pos)

    p = sub.add_parser("train-tagger", parents=[common], help="train the student tagger")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--subword-vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--holdout", type=float, default=0.1)
    p.add_argument("--hash-dim", type=int)
    p.set_defaults(func=_cmd_train_tagger)

    p = sub.add_parser("tag", parents=[common], help="tag a file with a trained student model")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("eval", parents=[common], help="score predictions against gold spans")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.add_argument("--per-sentence", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", parents=[common], help="measure per-sentence latency")
    p.add_argument("--system", choices=["ua", "student"], required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", help="student model file (system=student)")
    p.add_argument("--vectors")
    p.add_argument("--remote")
    p.add_argument("--subword-vocab")
    p.add_argument("--warmup", type=int, default=50)
    p.add_argument("--measure-n", type=int)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--out")
    p.add_argument("--csv")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    if args.command == "bench":
        if args.system == "student" and not args.model:
            parser.error("bench --system student requires --model")
        if args.system == "ua" and not (args.vectors or args.remote):
            parser.error("bench --system ua requires --vectors or --remote")
        if args.system == "ua" and not args.subword_vocab:
            parser.error("bench --system ua requires --subword-vocab")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
