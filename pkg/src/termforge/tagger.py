"""Linear-chain structured perceptron over B/I/O labels: the inference-time model.

Trained on weak labels, it replaces the full annotator at serving time.  The
feature set injects the subword-count signal (bucketed) so the morphology
cue survives distillation.  Transitions that would break IOB validity are
pinned to -inf, so every decode is a valid label sequence by construction.
"""

from __future__ import annotations

import json
import random
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .corpus import Sentence, TermSpan, UNKNOWN, labels_from_spans, spans_from_iob
from .subword import SubwordVocab, subtoken_count

MAGIC = "termforge/tagger"
FORMAT_VERSION = 1

LABELS = ("B", "I", "O")
START = "<s>"
NEG_INF = float("-inf")

_PINNED = frozenset({(START, "I"), ("O", "I")})  # hard IOB constraints


class ModelFormatError(ValueError):
    """Model file has the wrong magic, version, or structure."""


def _shape(word: str) -> str:
    out = []
    for ch in word:
        if ch.isdigit():
            cls = "d"
        elif ch == "-":
            cls = "-"
        elif ch.isupper():
            cls = "X"
        elif ch.islower():
            cls = "x"
        else:
            cls = "o"
        if not out or out[-1] != cls:
            out.append(cls)
    return "".join(out)


def _subword_bucket(word: str, vocab: SubwordVocab) -> str:
    count = subtoken_count(word, vocab)
    if count <= 1:
        return "1"
    if count <= 3:
        return "2-3"
    return "4+"


def featurize_sentence(sentence: Sentence, vocab: SubwordVocab) -> List[Tuple[str, ...]]:
    """Per-position feature tuples for a whole sentence (the hot path)."""
    words = sentence.surfaces
    lowers = [w.lower() for w in words]
    n = len(words)
    out = []
    for i in range(n):
        word = words[i]
        lower = lowers[i]
        feats = [
            "bias",
            "w=" + word,
            "lw=" + lower,
            "pre1=" + lower[:1],
            "pre2=" + lower[:2],
            "pre3=" + lower[:3],
            "suf1=" + lower[-1:],
            "suf2=" + lower[-2:],
            "suf3=" + lower[-3:],
            "shape=" + _shape(word),
            "lw-1=" + (lowers[i - 1] if i >= 1 else START),
            "lw-2=" + (lowers[i - 2] if i >= 2 else START),
            "lw+1=" + (lowers[i + 1] if i + 1 < n else "</s>"),
            "lw+2=" + (lowers[i + 2] if i + 2 < n else "</s>"),
            "subw=" + _subword_bucket(word, vocab),
        ]
        if sentence.tokens[i].pos != UNKNOWN:
            feats.append("pos=" + sentence.tokens[i].pos)
        out.append(tuple(feats))
    return out


def featurize(sentence: Sentence, position: int, vocab: SubwordVocab) -> Tuple[str, ...]:
    """Feature tuple for one token position (deterministic in its inputs)."""
    if not 0 <= position < len(sentence):
        raise IndexError(f"position {position} out of range")
    return featurize_sentence(sentence, vocab)[position]


@dataclass
class TaggerModel:
    emissions: Dict[str, Dict[str, float]]
    transitions: Dict[str, Dict[str, float]]
    vocab: SubwordVocab
    hash_dim: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def map_feature(self, feature: str) -> str:
        if self.hash_dim is None:
            return feature
        return "h%d" % (zlib.crc32(feature.encode("utf-8")) % self.hash_dim)


def transition_weight(model: TaggerModel, prev: str, label: str) -> float:
    if (prev, label) in _PINNED:
        return NEG_INF
    return model.transitions.get(prev, {}).get(label, 0.0)


def _emission_scores(feats: Sequence[str], model: TaggerModel) -> Dict[str, float]:
    scores = {"B": 0.0, "I": 0.0, "O": 0.0}
    emissions = model.emissions
    if model.hash_dim is None:
        keys = feats
    else:
        keys = [model.map_feature(f) for f in feats]
    for f in keys:
        per = emissions.get(f)
        if per:
            for label, w in per.items():
                scores[label] += w
    return scores


def viterbi(feature_seq: Sequence[Sequence[str]], model: TaggerModel) -> Tuple[List[str], float]:
    """Exact best label sequence and its score under emissions + transitions."""
    n = len(feature_seq)
    e0 = _emission_scores(feature_seq[0], model)
    scores: Dict[str, float] = {}
    for label in LABELS:
        t = transition_weight(model, START, label)
        if t != NEG_INF:
            scores[label] = e0[label] + t
    backpointers: List[Dict[str, str]] = []
    for i in range(1, n):
        ei = _emission_scores(feature_seq[i], model)
        new_scores: Dict[str, float] = {}
        bp: Dict[str, str] = {}
        for label in LABELS:
            best_prev = None
            best = NEG_INF
            for prev in LABELS:
                if prev not in scores:
                    continue
                t = transition_weight(model, prev, label)
                if t == NEG_INF:
                    continue
                cand = scores[prev] + t
                if best_prev is None or cand > best:
                    best, best_prev = cand, prev
            if best_prev is not None:
                new_scores[label] = best + ei[label]
                bp[label] = best_prev
        scores = new_scores
        backpointers.append(bp)

    last = None
    best = NEG_INF
    for label in LABELS:
        if label in scores and (last is None or scores[label] > best):
            best, last = scores[label], label
    assert last is not None
    labels = [last]
    for bp in reversed(backpointers):
        labels.append(bp[labels[-1]])
    labels.reverse()
    return labels, best


def predict(sentence: Sentence, model: TaggerModel) -> Tuple[List[str], List[TermSpan]]:
    """Decode one sentence; output is always IOB-valid, spans decode strictly."""
    feats = featurize_sentence(sentence, model.vocab)
    labels, _ = viterbi(feats, model)
    return labels, spans_from_iob(labels, strict=True)


def train_tagger(
    sentences: Sequence[Sentence],
    spans_per_sentence: Sequence[Sequence[TermSpan]],
    vocab: SubwordVocab,
    epochs: int = 5,
    seed: int = 0,
    holdout_fraction: float = 0.1,
    hash_dim: Optional[int] = None,
) -> TaggerModel:
    """Structured-perceptron training with sequence-level averaged updates.

    Decode each sentence with the current weights and update on mismatch;
    weights are averaged over per-sentence snapshots (lazily).  A seeded
    held-out slice is scored (token accuracy, exact/partial span F1 against
    the training labels) into ``meta``.
    """
    if not sentences:
        raise ValueError("empty training corpus")
    if len(sentences) != len(spans_per_sentence):
        raise ValueError("spans_per_sentence length must match sentences")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")

    gold_labels = [
        labels_from_spans(len(s), spans) for s, spans in zip(sentences, spans_per_sentence)
    ]

    rng = random.Random(seed)
    order = list(range(len(sentences)))
    rng.shuffle(order)
    n_holdout = int(len(sentences) * holdout_fraction)
    holdout_idx = order[:n_holdout]
    train_idx = order[n_holdout:]
    if not train_idx:
        raise ValueError("holdout fraction leaves no training sentences")

    model = TaggerModel(emissions={}, transitions={}, vocab=vocab, hash_dim=hash_dim)
    feature_cache = {i: featurize_sentence(sentences[i], vocab) for i in train_idx}

    em_totals: Dict[str, Dict[str, float]] = {}
    em_stamps: Dict[str, Dict[str, int]] = {}
    tr_totals: Dict[str, Dict[str, float]] = {}
    tr_stamps: Dict[str, Dict[str, int]] = {}
    instance = 0

    def bump(weights, totals, stamps, key, label, delta):
        per_w = weights.setdefault(key, {})
        per_t = totals.setdefault(key, {})
        per_s = stamps.setdefault(key, {})
        per_t[label] = per_t.get(label, 0.0) + per_w.get(label, 0.0) * (instance - per_s.get(label, 0))
        per_s[label] = instance
        per_w[label] = per_w.get(label, 0.0) + delta

    # averaging convention: the weight vector is (conceptually) snapshotted
    # after every training sentence; `instance` counts snapshots taken so far
    for _ in range(epochs):
        rng.shuffle(train_idx)
        for idx in train_idx:
            feats = feature_cache[idx]
            gold = gold_labels[idx]
            pred, _ = viterbi(feats, model)
            if pred != gold:
                prev_gold = prev_pred = START
                for pos in range(len(gold)):
                    g, p = gold[pos], pred[pos]
                    if g != p:
                        for f in feats[pos]:
                            key = model.map_feature(f)
                            bump(model.emissions, em_totals, em_stamps, key, g, +1.0)
                            bump(model.emissions, em_totals, em_stamps, key, p, -1.0)
                    if (prev_gold, g) != (prev_pred, p):
                        if (prev_gold, g) not in _PINNED:
                            bump(model.transitions, tr_totals, tr_stamps, prev_gold, g, +1.0)
                        if (prev_pred, p) not in _PINNED:
                            bump(model.transitions, tr_totals, tr_stamps, prev_pred, p, -1.0)
                    prev_gold, prev_pred = g, p
            instance += 1

    def average(weights, totals, stamps):
        out: Dict[str, Dict[str, float]] = {}
        for key, per_label in weights.items():
            per_out = {}
            for label, w in per_label.items():
                total = totals[key][label] + w * (instance - stamps[key][label])
                avg = total / instance
                if avg != 0.0:
                    per_out[label] = avg
            if per_out:
                out[key] = per_out
        return out

    model.emissions = average(model.emissions, em_totals, em_stamps)
    model.transitions = average(model.transitions, tr_totals, tr_stamps)
    model.meta = {
        "epochs": epochs,
        "seed": seed,
        "n_train": len(train_idx),
        "n_holdout": len(holdout_idx),
        "n_features": len(model.emissions),
    }

    if holdout_idx:
        from .evaluate import evaluate  # local import: evaluate has no tagger dependency

        predicted, reference = [], []
        correct = total = 0
        for i in holdout_idx:
            labels, spans = predict(sentences[i], model)
            predicted.append(spans)
            reference.append(list(spans_per_sentence[i]))
            for got, want in zip(labels, gold_labels[i]):
                correct += got == want
                total += 1
        report = evaluate(predicted, reference)
        model.meta["holdout_token_accuracy"] = correct / total
        model.meta["holdout_exact_f1"] = report.exact.f1
        model.meta["holdout_partial_f1"] = report.partial.f1
    return model


def save_tagger(model: TaggerModel, path: Union[str, Path]) -> int:
    """Serialize the model (subword vocabulary included); returns file size in bytes."""
    doc = {
        "magic": MAGIC,
        "version": FORMAT_VERSION,
        "emissions": model.emissions,
        "transitions": model.transitions,
        "subword_vocab": sorted(model.vocab.entries),
        "max_word_chars": model.vocab.max_word_chars,
        "hash_dim": model.hash_dim,
        "meta": model.meta,
    }
    data = json.dumps(doc, sort_keys=True)
    Path(path).write_text(data, encoding="utf-8")
    return len(data.encode("utf-8"))


def load_tagger(path: Union[str, Path]) -> TaggerModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("magic") != MAGIC:
        raise ModelFormatError(f"{path} is not a tagger model file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported tagger model version {doc.get('version')} (want {FORMAT_VERSION})"
        )
    vocab = SubwordVocab(doc["subword_vocab"], max_word_chars=doc.get("max_word_chars", 100))
    return TaggerModel(
        emissions=doc["emissions"],
        transitions=doc["transitions"],
        vocab=vocab,
        hash_dim=doc.get("hash_dim"),
        meta=doc.get("meta", {}),
    )
