#!/usr/bin/env python3
"""The headline experiment: weak labels -> student tagger -> fidelity + latency.

Annotates the committed 5k-sentence corpus with the unsupervised annotator,
trains the student on 80% of the weak labels, scores it on the held-out 20%,
then compares per-sentence latency of the student against the annotator
served over the embedding wire protocol (cache disabled, batch size 1).

Run from the repo root:  python scripts/two_stage_experiment.py [--epochs N]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from termforge.annotator import AnnotatorConfig, annotate_sentence  # noqa: E402
from termforge.bench import bench_latency  # noqa: E402
from termforge.corpus import parse_conll  # noqa: E402
from termforge.datagen import GenerationOptions, generate  # noqa: E402
from termforge.embeddings import RemoteBackend, load_static_vectors  # noqa: E402
from termforge.evaluate import evaluate  # noqa: E402
from termforge.subword import load_vocab  # noqa: E402
from termforge.tagger import predict, save_tagger, train_tagger  # noqa: E402

from stub_service import StubEmbedService  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="/tmp/termforge-two-stage")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vectors = ROOT / "fixtures" / "corpus" / "vectors_32d.vec"
    vocab = load_vocab(ROOT / "fixtures" / "bert-base-uncased-vocab.txt")

    print("[1/4] generating weak labels over the 5k fixture corpus")
    started = time.perf_counter()
    weak_path = out_dir / "weak_5k.conll"
    backend = load_static_vectors(vectors)
    report = generate(
        [ROOT / "fixtures" / "corpus" / "unlabeled_5k.conll"],
        backend, vocab, weak_path,
        options=GenerationOptions(seed=args.seed),
        report_path=out_dir / "generation_report.json",
    )
    print(f"      {report.sentences} sentences, {report.terms} terms, "
          f"sources {report.source_counts} ({time.perf_counter() - started:.1f}s)")

    print(f"[2/4] training the student on 80% ({args.epochs} epochs)")
    started = time.perf_counter()
    weak = parse_conll(weak_path, strict_iob=True)
    n_train = int(len(weak.sentences) * 0.8)
    model = train_tagger(
        weak.sentences[:n_train], weak.gold_spans[:n_train], vocab,
        epochs=args.epochs, seed=args.seed,
    )
    size = save_tagger(model, out_dir / "student.json")
    print(f"      {model.meta['n_features']} features, model file "
          f"{size / 1e6:.2f} MB ({time.perf_counter() - started:.1f}s)")

    print("[3/4] scoring the student on the held-out 20% against the weak labels")
    predicted = [predict(s, model)[1] for s in weak.sentences[n_train:]]
    fidelity = evaluate(predicted, weak.gold_spans[n_train:])
    print(f"      exact F1 {fidelity.exact.f1:.4f}   partial F1 {fidelity.partial.f1:.4f}")

    print("[4/4] latency at batch size 1 on the 500-sentence fixture")
    bench_sentences = parse_conll(ROOT / "fixtures" / "corpus" / "bench_500.conll").sentences
    student_report = bench_latency(lambda s: predict(s, model), bench_sentences,
                                   warmup_n=50, repetitions=3)
    table = {}
    for line in vectors.read_text().splitlines():
        parts = line.split()
        table[parts[0]] = [float(x) for x in parts[1:]]
    config = AnnotatorConfig()
    with StubEmbedService(table=table) as url:
        remote = RemoteBackend(url, cache_enabled=False)
        ua_report = bench_latency(lambda s: annotate_sentence(s, remote, vocab, config),
                                  bench_sentences, warmup_n=50, repetitions=3)
    ratio = ua_report.mean_ms / student_report.mean_ms
    print(f"      student   {student_report.mean_ms:8.3f} ms/sentence "
          f"(p95 {student_report.p95_ms:.3f})")
    print(f"      annotator {ua_report.mean_ms:8.3f} ms/sentence "
          f"(p95 {ua_report.p95_ms:.3f}, embedding calls over HTTP, no cache)")
    print(f"      speedup   {ratio:8.1f}x")

    summary = {
        "weak_labels": report.to_json(),
        "fidelity": {"exact_f1": fidelity.exact.f1, "partial_f1": fidelity.partial.f1},
        "latency_ms": {"student": student_report.mean_ms, "annotator": ua_report.mean_ms,
                       "ratio": ratio},
        "model_bytes": size,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(f"summary written to {out_dir / 'summary.json'}")


if __name__ == "__main__":
    main()
