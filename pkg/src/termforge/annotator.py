"""Unsupervised term-mention annotator.

Per sentence: chunk candidate phrases from POS patterns, score each against
its sentence (topic) and its context units (specificity), drop low scorers,
then promote leftover single nouns whose lemma matches a surviving phrase
head or whose subword segmentation is long enough.  No labeled data anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from math import isfinite
from typing import Callable, Iterable, List, Optional, Sequence, Set, Tuple

from .corpus import Sentence, TermSpan, check_spans
from .embeddings import EmbeddingBackend, cosine_similarity
from .subword import SubwordVocab, subtoken_count

NOUN_TAGS = frozenset({"NOUN", "PROPN"})
CONTENT_TAGS = frozenset({"NOUN", "PROPN", "ADJ", "VERB", "ADV"})

SOURCE_CHUNK = "chunk"
SOURCE_LEMMA = "lemma-upgrade"
SOURCE_MORPH = "morph-upgrade"

_MORPH_COMPARISONS = ("ge", "gt")
_SP_MODES = ("similarity", "distance")
_SCOPES = ("sentence", "document", "corpus")
_CONTEXT_POLICIES = ("content-words", "all-tokens")
_HEAD_SOURCES = ("surviving", "all-candidates")


@dataclass(frozen=True)
class AnnotatorConfig:
    """Thresholds and policy knobs for the annotator.

    ``specificity_mode`` picks between the literal mean-cosine reading of the
    specificity formula (default; the 0.05 threshold is a lower bound on it)
    and the ``1 - cosine`` distance reading.  ``morph_comparison`` decides
    whether a subword count equal to ``t_morph`` already promotes (default)
    or only a strictly larger one does.
    """

    t_topic: float = 0.1
    t_sp: float = 0.05
    t_morph: int = 4
    morph_comparison: str = "ge"
    specificity_mode: str = "similarity"
    head_match_scope: str = "document"
    context_unit_policy: str = "content-words"
    head_lemma_source: str = "surviving"
    sp_when_no_context: float = 1.0

    def __post_init__(self):
        if not (isfinite(self.t_topic) and isfinite(self.t_sp)):
            raise ValueError("thresholds must be finite")
        if self.t_morph < 1:
            raise ValueError("t_morph must be >= 1")
        for value, allowed, name in (
            (self.morph_comparison, _MORPH_COMPARISONS, "morph_comparison"),
            (self.specificity_mode, _SP_MODES, "specificity_mode"),
            (self.head_match_scope, _SCOPES, "head_match_scope"),
            (self.context_unit_policy, _CONTEXT_POLICIES, "context_unit_policy"),
            (self.head_lemma_source, _HEAD_SOURCES, "head_lemma_source"),
        ):
            if value not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {value!r}")

    def morph_passes(self, count: float) -> bool:
        return count >= self.t_morph if self.morph_comparison == "ge" else count > self.t_morph


@dataclass(frozen=True)
class ScoredCandidate:
    span: TermSpan
    text: str
    source: str = SOURCE_CHUNK
    topic: Optional[float] = None
    sp: Optional[float] = None


@dataclass(frozen=True)
class CandidateAudit:
    sentence_id: str
    start: int
    end: int
    text: str
    source: str
    decision: str
    topic: Optional[float] = None
    sp: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "sentence": self.sentence_id,
            "start": self.start,
            "end": self.end,
            "text": self.text,
            "source": self.source,
            "decision": self.decision,
            "topic": self.topic,
            "sp": self.sp,
        }


@dataclass
class SentenceAnnotation:
    sentence_id: str
    spans: List[TermSpan]
    audits: List[CandidateAudit] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class AnnotationResult:
    annotations: List[SentenceAnnotation]

    @property
    def spans_per_sentence(self) -> List[List[TermSpan]]:
        return [a.spans for a in self.annotations]

    @property
    def errors(self) -> List[Tuple[str, str]]:
        return [(a.sentence_id, a.error) for a in self.annotations if a.error]

    def audits(self) -> Iterable[CandidateAudit]:
        for a in self.annotations:
            yield from a.audits


def extract_candidates(sentence: Sentence) -> List[ScoredCandidate]:
    """Maximal left-to-right matches of ADJ* (NOUN|PROPN)+ over the POS tags.

    An adjective run not followed by a noun contributes nothing; every match
    contains at least one noun.  Matches never overlap.
    """
    tags = [t.pos for t in sentence.tokens]
    n = len(tags)
    spans: List[TermSpan] = []
    i = 0
    while i < n:
        if tags[i] == "ADJ":
            j = i
            while j < n and tags[j] == "ADJ":
                j += 1
            if j < n and tags[j] in NOUN_TAGS:
                k = j
                while k < n and tags[k] in NOUN_TAGS:
                    k += 1
                spans.append(TermSpan(i, k))
                i = k
            else:
                i = j
        elif tags[i] in NOUN_TAGS:
            k = i
            while k < n and tags[k] in NOUN_TAGS:
                k += 1
            spans.append(TermSpan(i, k))
            i = k
        else:
            i += 1
    return [ScoredCandidate(span=s, text=s.text(sentence)) for s in spans]


def topic_score(candidate: ScoredCandidate, sentence: Sentence, backend: EmbeddingBackend) -> float:
    """Cosine between the candidate phrase embedding and its sentence embedding."""
    cand_vec, sent_vec = backend.embed_many([candidate.text, sentence.text])
    return cosine_similarity(cand_vec, sent_vec)


def context_units(
    candidate: ScoredCandidate,
    sentence: Sentence,
    candidates: Sequence[ScoredCandidate],
    policy: str = "content-words",
) -> List[str]:
    """Texts the specificity score averages over: the sentence's other
    candidate phrases plus tokens covered by no candidate (content words only
    under the default policy)."""
    units = [c.text for c in candidates if c.span != candidate.span]
    covered = set()
    for c in candidates:
        covered.update(range(c.span.start, c.span.end))
    for i, token in enumerate(sentence.tokens):
        if i in covered:
            continue
        if policy == "content-words" and token.pos not in CONTENT_TAGS:
            continue
        units.append(token.surface)
    return units


def specificity_score(
    candidate: ScoredCandidate,
    units: Sequence[str],
    backend: EmbeddingBackend,
    mode: str = "similarity",
    when_no_context: float = 1.0,
) -> float:
    """Mean pairwise embedding score between the candidate and its context units.

    ``similarity`` mode averages raw cosines; ``distance`` mode averages
    ``1 - cosine``.  With no context units the configured pass-through
    default is returned.
    """
    if mode not in _SP_MODES:
        raise ValueError(f"unknown specificity mode {mode!r}")
    if not units:
        return when_no_context
    vectors = backend.embed_many([candidate.text, *units])
    mw = vectors[0]
    mean_sim = sum(cosine_similarity(v, mw) for v in vectors[1:]) / len(units)
    return mean_sim if mode == "similarity" else 1.0 - mean_sim


def score_candidates(
    sentence: Sentence,
    candidates: Sequence[ScoredCandidate],
    backend: EmbeddingBackend,
    config: AnnotatorConfig,
) -> List[ScoredCandidate]:
    """Fill topic and specificity scores on every candidate."""
    scored = []
    for candidate in candidates:
        topic = topic_score(candidate, sentence, backend)
        units = context_units(candidate, sentence, candidates, config.context_unit_policy)
        sp = specificity_score(
            candidate, units, backend, config.specificity_mode, config.sp_when_no_context
        )
        scored.append(replace(candidate, topic=topic, sp=sp))
    return scored


def filter_candidates(
    candidates: Sequence[ScoredCandidate], config: AnnotatorConfig
) -> Tuple[List[ScoredCandidate], List[str]]:
    """Keep candidates whose scores are not below the thresholds.

    Returns (survivors, per-candidate decision strings); a score exactly at
    a threshold is kept.
    """
    survivors: List[ScoredCandidate] = []
    decisions: List[str] = []
    for c in candidates:
        if c.topic is None or c.sp is None:
            raise ValueError("filter_candidates requires scored candidates")
        reasons = []
        if c.topic < config.t_topic:
            reasons.append("topic")
        if c.sp < config.t_sp:
            reasons.append("sp")
        if reasons:
            decisions.append("dropped-" + "+".join(reasons))
        else:
            survivors.append(c)
            decisions.append("kept")
    return survivors, decisions


def head_lemma(candidate: ScoredCandidate, sentence: Sentence) -> str:
    """Lemma of the candidate's final token (English noun phrases are right-headed)."""
    return sentence.tokens[candidate.span.end - 1].lemma


def upgrade_nouns(
    sentence: Sentence,
    surviving: Sequence[ScoredCandidate],
    head_lemmas: Set[str],
    vocab: SubwordVocab,
    config: AnnotatorConfig,
) -> List[ScoredCandidate]:
    """Promote single nouns outside every surviving candidate.

    A noun is promoted when its lemma matches a surviving phrase head within
    scope, or failing that when its subword-unit count passes the morphology
    threshold (unknown words count as infinite and always pass).
    """
    covered = set()
    for c in surviving:
        covered.update(range(c.span.start, c.span.end))
    upgrades: List[ScoredCandidate] = []
    for i, token in enumerate(sentence.tokens):
        if i in covered or token.pos not in NOUN_TAGS:
            continue
        if token.lemma in head_lemmas:
            source = SOURCE_LEMMA
        elif config.morph_passes(subtoken_count(token.surface, vocab)):
            source = SOURCE_MORPH
        else:
            continue
        upgrades.append(ScoredCandidate(span=TermSpan(i, i + 1), text=token.surface, source=source))
    return upgrades


@dataclass
class _StageOne:
    sentence: Sentence
    candidates: List[ScoredCandidate]
    survivors: List[ScoredCandidate]
    decisions: List[str]
    error: Optional[str] = None


def _stage_one(sentence: Sentence, backend: EmbeddingBackend, config: AnnotatorConfig) -> _StageOne:
    try:
        candidates = extract_candidates(sentence)
        scored = score_candidates(sentence, candidates, backend, config)
        survivors, decisions = filter_candidates(scored, config)
        return _StageOne(sentence, scored, survivors, decisions)
    except Exception as exc:  # one bad sentence never aborts a document
        return _StageOne(sentence, [], [], [], error=f"{type(exc).__name__}: {exc}")


def _head_index(stages: Sequence[_StageOne], config: AnnotatorConfig) -> Set[str]:
    lemmas: Set[str] = set()
    for stage in stages:
        pool = stage.candidates if config.head_lemma_source == "all-candidates" else stage.survivors
        for candidate in pool:
            lemmas.add(head_lemma(candidate, stage.sentence))
    return lemmas


def _stage_two(
    stage: _StageOne,
    head_lemmas: Set[str],
    vocab: SubwordVocab,
    config: AnnotatorConfig,
) -> SentenceAnnotation:
    sid = stage.sentence.id
    if stage.error:
        return SentenceAnnotation(sid, [], [], error=stage.error)
    audits = [
        CandidateAudit(
            sid, c.span.start, c.span.end, c.text, c.source, decision, topic=c.topic, sp=c.sp
        )
        for c, decision in zip(stage.candidates, stage.decisions)
    ]
    try:
        upgrades = upgrade_nouns(stage.sentence, stage.survivors, head_lemmas, vocab, config)
    except Exception as exc:
        return SentenceAnnotation(sid, [], audits, error=f"{type(exc).__name__}: {exc}")
    audits.extend(
        CandidateAudit(sid, c.span.start, c.span.end, c.text, c.source, "kept") for c in upgrades
    )
    spans = check_spans(
        [c.span for c in stage.survivors] + [c.span for c in upgrades], len(stage.sentence)
    )
    return SentenceAnnotation(sid, spans, audits)


def annotate_document(
    sentences: Sequence[Sentence],
    backend: EmbeddingBackend,
    vocab: SubwordVocab,
    config: AnnotatorConfig = AnnotatorConfig(),
    map_fn: Callable = map,
) -> AnnotationResult:
    """Annotate a batch of sentences as one document.

    Two passes: extract/score/filter every sentence, build the head-lemma
    index at the configured scope, then run single-noun upgrades and merge.
    ``map_fn`` may be a thread pool's ``map`` to fan out the per-sentence
    stages; results keep input order either way.  Under ``corpus`` scope the
    caller is expected to pass the whole corpus as one batch.
    """
    stages = list(map_fn(lambda s: _stage_one(s, backend, config), sentences))
    if config.head_match_scope == "sentence":
        annotations = list(
            map_fn(
                lambda stage: _stage_two(stage, _head_index([stage], config), vocab, config),
                stages,
            )
        )
    else:
        index = _head_index(stages, config)
        annotations = list(map_fn(lambda stage: _stage_two(stage, index, vocab, config), stages))
    return AnnotationResult(annotations)


def annotate_sentence(
    sentence: Sentence,
    backend: EmbeddingBackend,
    vocab: SubwordVocab,
    config: AnnotatorConfig = AnnotatorConfig(),
) -> SentenceAnnotation:
    """Single-sentence convenience wrapper (head scope collapses to the sentence)."""
    return annotate_document([sentence], backend, vocab, config).annotations[0]


def write_audit_jsonl(path, audits: Iterable[CandidateAudit]) -> int:
    """Write one JSON object per candidate; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for audit in audits:
            f.write(json.dumps(audit.to_json(), sort_keys=True))
            f.write("\n")
            count += 1
    return count
