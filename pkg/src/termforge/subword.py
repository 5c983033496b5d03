"""Greedy longest-match-first subword segmentation (WordPiece-style).

The per-word subword-unit count is used as a cheap morphological-complexity
signal: common words segment into one unit, rare technical words into many.
A word that cannot be segmented at all maps to the unknown marker and is
treated as maximally complex (infinite count).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Tuple, Union

log = logging.getLogger(__name__)

UNK = "[UNK]"
CONTINUATION_PREFIX = "##"


@dataclass(frozen=True)
class Segmentation:
    units: Tuple[str, ...]
    is_unknown: bool = False

    def __post_init__(self):
        if not self.units:
            raise ValueError("segmentation must have at least one unit")

    def __len__(self) -> int:
        return len(self.units)


class SubwordVocab:
    """Immutable unit inventory; continuation units carry the ``##`` prefix."""

    def __init__(self, entries, max_word_chars: int = 100):
        units = frozenset(entries) | {UNK}
        if len(units) <= 1:
            raise ValueError("subword vocabulary must be non-empty")
        if max_word_chars < 1:
            raise ValueError("max_word_chars must be positive")
        self.entries: FrozenSet[str] = units
        self.max_word_chars = max_word_chars
        self._cache: Dict[str, Segmentation] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, unit: str) -> bool:
        return unit in self.entries


def load_vocab(path: Union[str, Path], max_word_chars: int = 100) -> SubwordVocab:
    """Load a one-unit-per-line vocabulary file (the common distributed format)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    units = []
    seen = set()
    duplicates = 0
    for line in lines:
        unit = line.strip()
        if not unit:
            continue
        if unit in seen:
            duplicates += 1
            continue
        seen.add(unit)
        units.append(unit)
    if not units:
        raise ValueError(f"empty subword vocabulary file: {path}")
    if duplicates:
        log.warning("%s: %d duplicate vocabulary lines ignored", path, duplicates)
    log.info("%s: %d lines, %d distinct units", path, len(lines), len(units))
    return SubwordVocab(units, max_word_chars=max_word_chars)


_UNKNOWN_SEGMENTATION = Segmentation((UNK,), is_unknown=True)


def tokenize_word(word: str, vocab: SubwordVocab) -> Segmentation:
    """Segment one word by greedy longest prefix match over the vocabulary.

    The word is lowercased first (vocabularies here are uncased).  After the
    first unit, candidate matches carry the ``##`` continuation prefix.  If no
    unit matches at some position, the whole word is unknown.
    """
    if not word:
        raise ValueError("cannot segment an empty word")
    cached = vocab._cache.get(word)
    if cached is not None:
        return cached

    lowered = word.lower()
    if len(lowered) > vocab.max_word_chars:
        vocab._cache[word] = _UNKNOWN_SEGMENTATION
        return _UNKNOWN_SEGMENTATION

    units = []
    start = 0
    n = len(lowered)
    while start < n:
        end = n
        match = None
        while start < end:
            piece = lowered[start:end]
            if start > 0:
                piece = CONTINUATION_PREFIX + piece
            if piece in vocab.entries:
                match = piece
                break
            end -= 1
        if match is None:
            vocab._cache[word] = _UNKNOWN_SEGMENTATION
            return _UNKNOWN_SEGMENTATION
        units.append(match)
        start = end

    seg = Segmentation(tuple(units))
    vocab._cache[word] = seg
    return seg


def subtoken_count(word: str, vocab: SubwordVocab) -> float:
    """Number of subword units for the word; unknown words count as infinity."""
    seg = tokenize_word(word, vocab)
    return math.inf if seg.is_unknown else len(seg)
