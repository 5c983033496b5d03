#!/usr/bin/env python3
"""Rebuild the committed corpus fixtures under fixtures/corpus/.

Everything is derived from string seeds, so reruns are byte-identical.  The
synthetic corpus mixes four technical topics over shared sentence templates;
the matching static vectors are drawn around per-topic centroids so that
topical phrases score high against their sentence and generic/off-topic
nouns score low.  A few rare nouns are deliberately left out of the vector
file: the annotator must recover them through the subword-morphology route
(or drop them for good when their segmentation is short).

Run from the repo root:  python scripts/make_fixtures.py
"""

from __future__ import annotations

import math
import random
import sys
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

SEED = "termforge-fixtures-v1"
DIM = 64
OUT = ROOT / "fixtures" / "corpus"

# "rares" only ever occur standalone, so the annotator can recover them only
# through subword morphology; "rares_headed" also occur as ADJ+NOUN phrases,
# whose surviving heads make the standalone occurrences lemma-upgradable.
# Both sets are excluded from the vector file (their chunks always score 0).
TOPICS = {
    "pharma": {
        "nouns": [
            "cytokine", "dosage", "placebo", "biomarker", "cohort", "infusion",
            "toxicity", "antibody", "receptor", "enzyme", "metabolite", "mutation",
            "vaccine", "tumor",
        ],
        "adjs": ["clinical", "hepatic", "renal", "adverse", "oral", "chronic", "acute", "systemic"],
        "propns": ["FDA", "EMA", "Roche"],
        "rares": ["paracetamol", "ibuprofen"],
        "rares_headed": ["hepatotoxicity", "pharmacokinetics", "immunoassay"],
    },
    "materials": {
        "nouns": [
            "graphene", "conductivity", "substrate", "nanowire", "lattice", "polymer",
            "alloy", "coating", "electrode", "crystal", "membrane", "ceramic", "oxide",
        ],
        "adjs": ["crystalline", "amorphous", "thermal", "porous", "conductive", "anisotropic", "magnetic"],
        "propns": ["Raman", "MIT", "Berkeley"],
        "rares": ["photoluminescence"],
        "rares_headed": ["magnetoresistance"],
    },
    "nlp": {
        "nouns": [
            "tokenizer", "embedding", "lexicon", "parser", "treebank", "annotation",
            "tagger", "grammar", "corpus", "syntax", "morphology", "vocabulary",
        ],
        "adjs": ["lexical", "syntactic", "neural", "multilingual", "morphological", "statistical", "contextual"],
        "propns": ["BERT", "Stanford", "Prague"],
        "rares": ["lemmatization", "pretokenization"],
        "rares_headed": ["subcategorization"],
    },
    "astro": {
        "nouns": [
            "galaxy", "orbit", "telescope", "photon", "nebula", "quasar", "pulsar",
            "luminosity", "spectrum", "redshift", "comet", "asteroid",
        ],
        "adjs": ["stellar", "orbital", "galactic", "spectral", "interstellar", "radial", "solar", "cosmic"],
        "propns": ["Kepler", "Hubble", "NASA"],
        "rares": ["exoplanet"],
        "rares_headed": ["spectropolarimetry"],
    },
}

# out-of-vector nouns whose subword count stays below the morphology
# threshold: these must end up unlabeled everywhere
LOW_UNKNOWNS = ["spectrograph", "nanoindentation", "crystallinity"]

GENERIC_NOUNS = [
    "study", "result", "method", "approach", "overview", "summary", "baseline",
    "sample", "figure", "table", "section", "review", "report", "case", "outcome",
    "setting", "impact", "effect", "number", "range", "value", "change",
]
GENERIC_ADJS = [
    "novel", "robust", "standard", "consistent", "significant", "small", "large",
    "recent", "typical", "further",
]
AMBIG = ["results", "increases", "controls", "measures", "reports", "studies"]
VERBS = [
    "shows", "indicates", "reduces", "improves", "suggests", "confirms", "presents",
    "yields", "reveals", "demonstrates", "examines", "outlines", "describes", "predicts",
]
AUX = ["is", "are", "was", "were"]
ADVS = ["significantly", "rapidly", "consistently", "broadly", "markedly", "slightly", "strongly", "partially"]
DETS = ["the", "a", "this", "each", "our", "these", "its"]
ADPS = ["of", "in", "with", "for", "across", "under", "between", "within", "against"]
CCONJS = ["and", "or", "but"]
SCONJS = ["that", "while", "because"]
PRONS = ["we", "it", "they"]
NUMS = ["42", "12", "3", "128", "seven"]

TEMPLATES = [
    (3, "DET TADJ TNOUN VERB DET GNOUN ADP DET TNOUNS ."),
    (3, "DET TNOUN ADP DET TADJ TNOUN VERB ADV ."),
    (2, "PROPN VERB DET TADJ TNOUN ADP TNOUNS ."),
    (2, "PRON VERB DET TNOUN ADP DET RARE ."),
    (2, "DET RARE VERB DET TADJ TNOUN ADP DET GNOUN ."),
    (2, "DET TADJ TADJ TNOUN AUX ADV GADJ ."),
    (1, "DET GNOUNS ADP PROPN AUX GADJ CC GADJ ."),
    (2, "DET XNOUN VERB ADV ADP DET TADJ TNOUN ."),
    (2, "DET TNOUNS CC TNOUNS VERB DET GNOUN ADP DET TADJ TNOUN ."),
    (1, "GNOUN NUM VERB DET TNOUN ADP TNOUNS , CC DET GNOUN AUX GADJ ."),
    (2, "DET AMBN ADP DET TNOUN AMBV DET GNOUN ADP TNOUNS ."),
    (1, "PRON AUX GADJ SCONJ DET TNOUN VERB ADV ."),
    (1, "DET TADJ TNOUN ( PROPN ) VERB DET GNOUN ."),
    (1, "DET TNOUN ADP DET XNOUN AUX ADV GADJ ."),
    (1, "DET LOWUNK ADP DET TNOUN VERB DET GNOUN ."),
    (2, "DET TADJ TNOUN VERB SCONJ DET TNOUN ADP TNOUNS AUX GADJ ."),
    (1, "DET GNOUN ADP DET GNOUN AUX ADV GADJ ."),
    (1, "PRON VERB DET GNOUN ADP DET RARE CC DET TADJ TNOUN ."),
    (1, "DET TADJ TNOUNS VERB DET AMBN ADP DET TNOUN ."),
    (1, "PROPN CC PROPN VERB DET TNOUN ADP DET TADJ GNOUN ."),
    (2, "DET TADJ RAREH VERB DET GNOUN ADP DET TNOUN ."),
    (2, "PRON VERB DET RAREH ADP DET TADJ TNOUN ."),
    (1, "DET TNOUN ADP RAREH AUX ADV GADJ ."),
]

PUNCT = {".", ",", "(", ")"}


def plural(noun: str) -> str:
    if noun.endswith(("s", "x", "z", "ch", "sh")):
        return noun + "es"
    if noun.endswith("y") and noun[-2] not in "aeiou":
        return noun[:-1] + "ies"
    return noun + "s"


def unit(rng: random.Random, dim: int = DIM) -> list:
    v = [rng.gauss(0.0, 1.0) for _ in range(dim)]
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v]


def combine(parts) -> list:
    v = [0.0] * DIM
    for weight, vec in parts:
        for i in range(DIM):
            v[i] += weight * vec[i]
    return v


def normalize(v) -> list:
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v]


def centroid(name: str) -> list:
    return unit(random.Random(f"{SEED}|centroid|{name}"))


C_TOPIC = {t: centroid(t) for t in TOPICS}
C_SHARED = centroid("shared")


def word_vector(word: str, role: str, topic: str = "") -> list:
    noise = unit(random.Random(f"{SEED}|vec|{word}"))
    if role == "topic":
        return normalize(combine([(0.8, C_TOPIC[topic]), (0.2, C_SHARED), (0.3, noise)]))
    if role == "generic":
        # decorrelated from the topics and from each other, slightly
        # anti-aligned with the discourse direction: generic nouns get no
        # mutual support in the specificity mean
        return normalize(combine([(1.0, noise), (-0.12, C_SHARED)]))
    if role == "discourse":
        return normalize(combine([(0.6, C_SHARED), (0.4, noise)]))
    if role == "function":
        return [0.18 * x for x in noise]
    raise ValueError(role)


def build_vector_table() -> dict:
    table = {}

    def put(word, role, topic=""):
        table[word.lower()] = word_vector(word.lower(), role, topic)

    for topic, words in TOPICS.items():
        for noun in words["nouns"]:
            put(noun, "topic", topic)
            put(plural(noun), "topic", topic)
        for adj in words["adjs"]:
            put(adj, "topic", topic)
        for propn in words["propns"]:
            put(propn, "topic", topic)
    for noun in GENERIC_NOUNS:
        put(noun, "generic")
        put(plural(noun), "generic")
    for adj in GENERIC_ADJS:
        put(adj, "generic")
    for word in AMBIG + VERBS + ADVS:
        put(word, "discourse")
    for word in AUX + DETS + ADPS + CCONJS + SCONJS + PRONS:
        put(word, "function")
    return table


def write_vectors(path: Path, table: dict) -> None:
    lines = []
    for word in sorted(table):
        comps = " ".join(f"{x:.6f}" for x in table[word])
        lines.append(f"{word} {comps}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def fill_slot(slot: str, topic: str, rng: random.Random):
    """Returns (surface, pos, lemma)."""
    words = TOPICS[topic]
    if slot in PUNCT:
        return slot, "PUNCT", slot
    if slot == "DET":
        w = rng.choice(DETS)
        return w, "DET", w
    if slot == "TADJ":
        w = rng.choice(words["adjs"])
        return w, "ADJ", w
    if slot == "GADJ":
        w = rng.choice(GENERIC_ADJS)
        return w, "ADJ", w
    if slot == "TNOUN":
        w = rng.choice(words["nouns"])
        return w, "NOUN", w
    if slot == "TNOUNS":
        w = rng.choice(words["nouns"])
        return plural(w), "NOUN", w
    if slot == "GNOUN":
        w = rng.choice(GENERIC_NOUNS)
        return w, "NOUN", w
    if slot == "GNOUNS":
        w = rng.choice(GENERIC_NOUNS)
        return plural(w), "NOUN", w
    if slot == "RARE":
        w = rng.choice(words["rares"])
        return w, "NOUN", w
    if slot == "RAREH":
        w = rng.choice(words["rares_headed"])
        return w, "NOUN", w
    if slot == "LOWUNK":
        w = rng.choice(LOW_UNKNOWNS)
        return w, "NOUN", w
    if slot == "XNOUN":
        other = rng.choice([t for t in TOPICS if t != topic])
        w = rng.choice(TOPICS[other]["nouns"])
        return w, "NOUN", w
    if slot == "PROPN":
        w = rng.choice(words["propns"])
        return w, "PROPN", w
    if slot == "VERB":
        w = rng.choice(VERBS)
        return w, "VERB", w
    if slot == "AMBV":
        w = rng.choice(AMBIG)
        return w, "VERB", w
    if slot == "AMBN":
        w = rng.choice(AMBIG)
        return w, "NOUN", w[:-1]
    if slot == "AUX":
        w = rng.choice(AUX)
        return w, "AUX", "be"
    if slot == "ADV":
        w = rng.choice(ADVS)
        return w, "ADV", w
    if slot == "ADP":
        w = rng.choice(ADPS)
        return w, "ADP", w
    if slot == "CC":
        w = rng.choice(CCONJS)
        return w, "CCONJ", w
    if slot == "SCONJ":
        w = rng.choice(SCONJS)
        return w, "SCONJ", w
    if slot == "PRON":
        w = rng.choice(PRONS)
        return w, "PRON", w
    if slot == "NUM":
        w = rng.choice(NUMS)
        return w, "NUM", w
    raise ValueError(f"unknown slot {slot!r}")


def make_sentence(rng: random.Random):
    topic = rng.choice(sorted(TOPICS))
    weights = [w for w, _ in TEMPLATES]
    template = rng.choices([t for _, t in TEMPLATES], weights=weights)[0]
    rows = [fill_slot(slot, topic, rng) for slot in template.split()]
    surface, pos, lemma = rows[0]
    if pos not in ("PROPN", "PUNCT", "NUM"):
        rows[0] = (surface[0].upper() + surface[1:], pos, lemma)
    return rows


def write_corpus(path: Path, n_sentences: int, seed: str, columns: int = 3) -> None:
    rng = random.Random(seed)
    lines = []
    for _ in range(n_sentences):
        for surface, pos, lemma in make_sentence(rng):
            cols = [surface, pos, lemma][:columns]
            lines.append("\t".join(cols))
        lines.append("")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def sanity_report(sample: int = 800) -> None:
    from termforge.annotator import AnnotatorConfig, annotate_document
    from termforge.corpus import parse_conll
    from termforge.embeddings import load_static_vectors
    from termforge.subword import load_vocab

    backend = load_static_vectors(OUT / "vectors_32d.vec")
    vocab = load_vocab(ROOT / "fixtures" / "bert-base-uncased-vocab.txt")
    sentences = parse_conll(OUT / "unlabeled_5k.conll").sentences[:sample]
    result = annotate_document(sentences, backend, vocab, AnnotatorConfig())

    decisions = Counter()
    near_threshold = 0
    scored = 0
    spans = 0
    with_spans = 0
    for annotation in result.annotations:
        spans += len(annotation.spans)
        with_spans += bool(annotation.spans)
        for audit in annotation.audits:
            if audit.source == "chunk":
                decisions[audit.decision] += 1
                scored += 1
                if abs(audit.topic - 0.1) < 0.03 or abs(audit.sp - 0.05) < 0.03:
                    near_threshold += 1
            else:
                decisions[audit.source] += 1
    print(f"sanity over {sample} sentences:")
    print(f"  decisions: {dict(decisions)}")
    print(f"  candidates near a threshold: {near_threshold}/{scored}")
    print(f"  term spans: {spans} ({spans / sample:.2f}/sentence), "
          f"{with_spans / sample:.0%} sentences with >=1 span")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    write_vectors(OUT / "vectors_32d.vec", build_vector_table())
    write_corpus(OUT / "unlabeled_5k.conll", 5000, f"{SEED}|corpus|weak")
    write_corpus(OUT / "pos_train_1k.conll", 1000, f"{SEED}|corpus|pos", columns=2)
    write_corpus(OUT / "bench_500.conll", 500, f"{SEED}|corpus|bench")
    write_corpus(OUT / "tiny_annotate.conll", 12, f"{SEED}|corpus|tiny")
    for name in ("vectors_32d.vec", "unlabeled_5k.conll", "pos_train_1k.conll",
                 "bench_500.conll", "tiny_annotate.conll"):
        print(f"wrote {OUT / name}")
    sanity_report()


if __name__ == "__main__":
    main()
