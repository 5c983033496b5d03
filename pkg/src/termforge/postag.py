"""Self-contained averaged-perceptron POS tagger plus a rule-based noun lemmatizer.

Lets the pipeline run on raw text when input files carry no POS column; files
that do carry one bypass this module entirely.  Decoding is greedy
left-to-right (downstream only needs reliable ADJ/NOUN/PROPN boundaries).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from .corpus import Sentence, Token, UNKNOWN, UPOS_TAGS

MAGIC = "termforge/pos"
FORMAT_VERSION = 1

START = "-START-"
END = "-END-"


class ModelFormatError(ValueError):
    """Model file has the wrong magic, version, or structure."""


@dataclass
class PosModel:
    weights: Dict[str, Dict[str, float]]
    tags: List[str]
    tagdict: Dict[str, str] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _features(i: int, word: str, prev_tag: str, words: Sequence[str]) -> List[str]:
    lower = word.lower()
    feats = [
        "bias",
        "w=" + word,
        "lw=" + lower,
        "suf1=" + lower[-1:],
        "suf2=" + lower[-2:],
        "suf3=" + lower[-3:],
        "pre1=" + lower[:1],
        "prev=" + prev_tag,
        "pw=" + (words[i - 1].lower() if i > 0 else START),
        "nw=" + (words[i + 1].lower() if i + 1 < len(words) else END),
    ]
    if any(c.isdigit() for c in word):
        feats.append("has_digit")
    if "-" in word:
        feats.append("has_hyphen")
    if word.isupper():
        feats.append("is_upper")
    elif word.istitle():
        feats.append("is_title")
    elif word.islower():
        feats.append("is_lower")
    return feats


def _predict(feats: Sequence[str], weights: Dict[str, Dict[str, float]], tags: Sequence[str]) -> str:
    scores = dict.fromkeys(tags, 0.0)
    for f in feats:
        per_tag = weights.get(f)
        if per_tag is None:
            continue
        for tag, w in per_tag.items():
            scores[tag] += w
    # ties break on tag name for determinism
    return max(tags, key=lambda t: (scores[t], t))


def train_pos(
    corpus: Sequence[Sentence],
    epochs: int = 5,
    seed: int = 0,
    holdout_fraction: float = 0.1,
) -> PosModel:
    """Train by greedy perceptron updates with weight averaging.

    Sentences are shuffled each epoch (seeded); a held-out slice is split off
    first and its token accuracy recorded in ``meta``.
    """
    if not corpus:
        raise ValueError("empty training corpus")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    for s in corpus:
        for t in s.tokens:
            if t.pos == UNKNOWN or t.pos not in UPOS_TAGS:
                raise ValueError(f"token {t.surface!r} lacks a gold UPOS tag")

    rng = random.Random(seed)
    order = list(range(len(corpus)))
    rng.shuffle(order)
    n_holdout = int(len(corpus) * holdout_fraction)
    holdout = [corpus[i] for i in order[:n_holdout]]
    train = [corpus[i] for i in order[n_holdout:]]
    if not train:
        raise ValueError("holdout fraction leaves no training sentences")

    tags = sorted({t.pos for s in corpus for t in s.tokens})
    weights: Dict[str, Dict[str, float]] = {}
    totals: Dict[str, Dict[str, float]] = {}
    stamps: Dict[str, Dict[str, int]] = {}
    instance = 0

    def bump(feature: str, tag: str, delta: float) -> None:
        per_w = weights.setdefault(feature, {})
        per_t = totals.setdefault(feature, {})
        per_s = stamps.setdefault(feature, {})
        per_t[tag] = per_t.get(tag, 0.0) + per_w.get(tag, 0.0) * (instance - per_s.get(tag, 0))
        per_s[tag] = instance
        per_w[tag] = per_w.get(tag, 0.0) + delta

    for _ in range(epochs):
        rng.shuffle(train)
        for sentence in train:
            words = sentence.surfaces
            prev = START
            for i, token in enumerate(sentence.tokens):
                instance += 1
                feats = _features(i, words[i], prev, words)
                guess = _predict(feats, weights, tags)
                if guess != token.pos:
                    for f in feats:
                        bump(f, token.pos, 1.0)
                        bump(f, guess, -1.0)
                prev = guess

    averaged: Dict[str, Dict[str, float]] = {}
    for feature, per_tag in weights.items():
        out = {}
        for label, w in per_tag.items():
            total = totals[feature][label] + w * (instance - stamps[feature][label])
            avg = total / instance
            if avg != 0.0:
                out[label] = avg
        if out:
            averaged[feature] = out

    # words always seen with one tag (in the training slice) are decoded by
    # dictionary lookup
    seen_tags: Dict[str, set] = {}
    for sentence in train:
        for token in sentence.tokens:
            seen_tags.setdefault(token.surface.lower(), set()).add(token.pos)
    tagdict = {w: next(iter(ts)) for w, ts in seen_tags.items() if len(ts) == 1}

    model = PosModel(
        weights=averaged, tags=tags, tagdict=tagdict, meta={"epochs": epochs, "seed": seed}
    )
    if holdout:
        correct = total = 0
        for sentence in holdout:
            tagged = tag(sentence, model)
            for got, ref in zip(tagged.tokens, sentence.tokens):
                correct += got.pos == ref.pos
                total += 1
        model.meta["holdout_sentences"] = len(holdout)
        model.meta["holdout_accuracy"] = correct / total
    return model


def tag(sentence: Sentence, model: PosModel) -> Sentence:
    """Return a copy of the sentence with predicted POS tags.

    Greedy left-to-right decode; unambiguous known words come straight from
    the tag dictionary, everything else from the perceptron scores.
    """
    words = sentence.surfaces
    prev = START
    tokens: List[Token] = []
    for i, token in enumerate(sentence.tokens):
        guess = model.tagdict.get(words[i].lower())
        if guess is None:
            feats = _features(i, words[i], prev, words)
            guess = _predict(feats, model.weights, model.tags)
        tokens.append(Token(token.surface, guess, token.lemma))
        prev = guess
    return Sentence(tuple(tokens), id=sentence.id)


_ES_DROPS = ("ses", "xes", "zes", "ches", "shes")
_S_KEEPS = ("ss", "us", "is")


def lemmatize(word: str, pos: str, exceptions: Optional[Dict[str, str]] = None) -> str:
    """Rule-based noun lemma; non-nouns pass through unchanged.

    Strips ``-ies`` to ``y``, drops ``es`` after sibilant-style endings, else
    drops a final ``s`` unless the word ends in ``ss``/``us``/``is``.  An
    exception table (matched on the lowercased surface) wins over the rules.
    """
    if pos not in ("NOUN", "PROPN"):
        return word
    lower = word.lower()
    if exceptions:
        hit = exceptions.get(word) or exceptions.get(lower)
        if hit:
            return hit
    if lower.endswith("ies") and len(word) > 3:
        return word[:-3] + "y"
    if lower.endswith(_ES_DROPS):
        return word[:-2]
    if lower.endswith("s") and not lower.endswith(_S_KEEPS):
        return word[:-1]
    return word


def apply_lemmas(sentence: Sentence, exceptions: Optional[Dict[str, str]] = None) -> Sentence:
    """Fill each noun token's lemma via :func:`lemmatize`."""
    tokens = tuple(
        Token(t.surface, t.pos, lemmatize(t.surface, t.pos, exceptions)) for t in sentence.tokens
    )
    return Sentence(tokens, id=sentence.id)


def save_pos(model: PosModel, path: Union[str, Path]) -> None:
    doc = {
        "magic": MAGIC,
        "version": FORMAT_VERSION,
        "tags": model.tags,
        "tagdict": model.tagdict,
        "weights": model.weights,
        "meta": model.meta,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_pos(path: Union[str, Path]) -> PosModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("magic") != MAGIC:
        raise ModelFormatError(f"{path} is not a POS model file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported POS model version {doc.get('version')} (want {FORMAT_VERSION})"
        )
    return PosModel(
        weights=doc["weights"],
        tags=doc["tags"],
        tagdict=doc.get("tagdict", {}),
        meta=doc.get("meta", {}),
    )
