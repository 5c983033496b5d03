"""Core text data model: tokens, sentences, term spans, and the IOB codec.

The on-disk format is CoNLL-style: one token per line with 1-4 whitespace- or
tab-separated columns (surface, pos, lemma, iob-label), blank line between
sentences, ``#``-prefixed comment lines ignored.  A single untyped span class
is used throughout: labels are plain ``B``/``I``/``O``, never ``B-TYPE``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple, Union

UNKNOWN = "UNKNOWN"

UPOS_TAGS = frozenset(
    {
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
    }
)

IOB_LABELS = ("B", "I", "O")


class ConllParseError(ValueError):
    """Malformed CoNLL input (bad column count, bad tag, bad label)."""


class IOBError(ValueError):
    """Invalid IOB label sequence under strict decoding."""


class SpanOverlapError(ValueError):
    """Overlapping spans where a non-overlapping set is required."""


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str = UNKNOWN
    lemma: str = ""

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if self.pos != UNKNOWN and self.pos not in UPOS_TAGS:
            raise ValueError(f"not a UPOS tag: {self.pos!r}")
        if not self.lemma:
            object.__setattr__(self, "lemma", self.surface)


@dataclass(frozen=True)
class Sentence:
    tokens: Tuple[Token, ...]
    id: str = ""

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must have at least one token")
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> Tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass(frozen=True, order=True)
class TermSpan:
    """Half-open token-index interval [start, end) marking one term mention."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def overlaps(self, other: "TermSpan") -> bool:
        return self.start < other.end and other.start < self.end

    def covers(self, index: int) -> bool:
        return self.start <= index < self.end

    def text(self, sentence: Sentence) -> str:
        return " ".join(t.surface for t in sentence.tokens[self.start : self.end])


def check_spans(spans: Sequence[TermSpan], n_tokens: Optional[int] = None) -> List[TermSpan]:
    """Sort spans and verify they are non-overlapping (and in bounds if given)."""
    ordered = sorted(spans)
    for a, b in zip(ordered, ordered[1:]):
        if a.overlaps(b):
            raise SpanOverlapError(f"spans {a} and {b} overlap")
    if n_tokens is not None and ordered and ordered[-1].end > n_tokens:
        raise ValueError(f"span {ordered[-1]} exceeds sentence length {n_tokens}")
    return ordered


def spans_from_iob(labels: Sequence[str], strict: bool = False) -> List[TermSpan]:
    """Decode a B/I/O sequence into sorted, non-overlapping spans.

    Maximal ``B I*`` runs become spans.  An orphan I (at position 0 or right
    after O) is repaired to B in lenient mode and rejected in strict mode.
    """
    spans: List[TermSpan] = []
    start: Optional[int] = None
    for i, label in enumerate(labels):
        if label not in IOB_LABELS:
            raise IOBError(f"not an IOB label at position {i}: {label!r}")
        if label == "O":
            if start is not None:
                spans.append(TermSpan(start, i))
                start = None
        elif label == "B":
            if start is not None:
                spans.append(TermSpan(start, i))
            start = i
        else:  # "I"
            if start is None:
                if strict:
                    raise IOBError(f"orphan I at position {i}")
                start = i  # lenient repair: treat as B
    if start is not None:
        spans.append(TermSpan(start, len(labels)))
    return spans


def count_iob_repairs(labels: Sequence[str]) -> int:
    """Number of orphan-I positions the lenient decoder would repair to B."""
    repairs = 0
    prev = "O"
    for label in labels:
        if label == "I" and prev == "O":
            repairs += 1
        prev = label
    return repairs


def labels_from_spans(n_tokens: int, spans: Sequence[TermSpan]) -> List[str]:
    """Encode spans as a B/I/O sequence; spans must be non-overlapping."""
    ordered = check_spans(spans, n_tokens)
    labels = ["O"] * n_tokens
    for span in ordered:
        labels[span.start] = "B"
        for i in range(span.start + 1, span.end):
            labels[i] = "I"
    return labels


def flatten_nested(spans: Iterable[Tuple[int, int]], keep: str = "outer") -> List[TermSpan]:
    """Resolve nested/overlapping raw (start, end) pairs to a flat span set.

    ``keep="outer"`` keeps the longest span of each overlapping group,
    ``keep="inner"`` the shortest; ties break toward the earlier start.
    Used when preparing third-party data whose annotations allow nesting.
    """
    if keep not in ("outer", "inner"):
        raise ValueError(f"keep must be 'outer' or 'inner', got {keep!r}")
    prefer_long = keep == "outer"
    candidates = sorted(
        (TermSpan(s, e) for s, e in spans),
        key=lambda sp: (-(sp.end - sp.start) if prefer_long else (sp.end - sp.start), sp.start),
    )
    kept: List[TermSpan] = []
    for span in candidates:
        if not any(span.overlaps(k) for k in kept):
            kept.append(span)
    return sorted(kept)


@dataclass
class ParsedCorpus:
    sentences: List[Sentence]
    gold_spans: Optional[List[List[TermSpan]]]
    iob_repairs: int = 0

    @property
    def labeled(self) -> bool:
        return self.gold_spans is not None


def _iter_lines(source: Union[str, Path, TextIO]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            yield from f
    else:
        yield from source


def parse_conll(
    source: Union[str, Path, TextIO],
    strict_iob: bool = False,
    id_prefix: str = "s",
) -> ParsedCorpus:
    """Parse CoNLL-style rows into sentences (plus gold spans when labeled).

    Column layout per row: surface [pos [lemma [iob-label]]].  Missing pos and
    lemma default to UNKNOWN and the surface form.  Label presence must be
    uniform within a sentence.  Orphan-I labels are repaired to B and counted
    unless ``strict_iob`` is set, in which case they raise :class:`IOBError`.
    """
    sentences: List[Sentence] = []
    all_spans: List[List[TermSpan]] = []
    any_labels = False
    repairs = 0

    tokens: List[Token] = []
    labels: List[Optional[str]] = []

    def flush(lineno: int) -> None:
        nonlocal tokens, labels, repairs, any_labels
        if not tokens:
            return
        has_label = [l is not None for l in labels]
        if any(has_label) and not all(has_label):
            raise ConllParseError(f"line {lineno}: label column present on some rows only")
        sid = f"{id_prefix}{len(sentences)}"
        sentences.append(Sentence(tuple(tokens), id=sid))
        if all(has_label):
            any_labels = True
            seq = [l for l in labels if l is not None]
            repairs += count_iob_repairs(seq)
            all_spans.append(spans_from_iob(seq, strict=strict_iob))
        else:
            all_spans.append([])
        tokens, labels = [], []

    lineno = 0
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line.startswith("#"):
            continue
        if not line.strip():
            flush(lineno)
            continue
        cols = line.split()
        if len(cols) > 4:
            raise ConllParseError(
                f"line {lineno}: expected at most 4 columns (surface pos lemma label), got {len(cols)}"
            )
        surface = cols[0]
        pos = cols[1] if len(cols) >= 2 else UNKNOWN
        lemma = cols[2] if len(cols) >= 3 else ""
        label = cols[3] if len(cols) == 4 else None
        if pos != UNKNOWN and pos not in UPOS_TAGS:
            raise ConllParseError(f"line {lineno}: unknown POS tag {pos!r}")
        if label is not None and label not in IOB_LABELS:
            raise ConllParseError(f"line {lineno}: malformed IOB label {label!r}")
        tokens.append(Token(surface, pos, lemma))
        labels.append(label)
    flush(lineno + 1)

    if not any_labels:
        return ParsedCorpus(sentences, None, 0)
    return ParsedCorpus(sentences, all_spans, repairs)


def format_conll(
    sentences: Sequence[Sentence],
    spans_per_sentence: Optional[Sequence[Sequence[TermSpan]]] = None,
) -> str:
    """Serialize sentences (optionally with span labels) as CoNLL rows.

    Exact inverse of :func:`parse_conll`: all columns are written so a
    round-trip reproduces the corpus token-for-token and label-for-label.
    """
    if spans_per_sentence is not None and len(spans_per_sentence) != len(sentences):
        raise ValueError("spans_per_sentence length must match sentences")
    out = io.StringIO()
    for i, sentence in enumerate(sentences):
        if spans_per_sentence is not None:
            labels = labels_from_spans(len(sentence), spans_per_sentence[i])
        else:
            labels = None
        for j, token in enumerate(sentence.tokens):
            cols = [token.surface, token.pos, token.lemma]
            if labels is not None:
                cols.append(labels[j])
            out.write("\t".join(cols))
            out.write("\n")
        out.write("\n")
    return out.getvalue()


def write_conll(
    path: Union[str, Path],
    sentences: Sequence[Sentence],
    spans_per_sentence: Optional[Sequence[Sequence[TermSpan]]] = None,
) -> None:
    Path(path).write_text(format_conll(sentences, spans_per_sentence), encoding="utf-8")
