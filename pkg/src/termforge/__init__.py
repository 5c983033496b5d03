"""termforge: unsupervised term-mention annotation and a low-latency student tagger."""

__version__ = "0.1.0"

from .annotator import (
    AnnotatorConfig,
    ScoredCandidate,
    annotate_document,
    annotate_sentence,
    extract_candidates,
    filter_candidates,
    specificity_score,
    topic_score,
    upgrade_nouns,
)
from .corpus import (
    ParsedCorpus,
    Sentence,
    TermSpan,
    Token,
    labels_from_spans,
    parse_conll,
    spans_from_iob,
    write_conll,
)
from .embeddings import (
    EmbeddingBackend,
    EmbeddingVector,
    RemoteBackend,
    StaticVectorBackend,
    cosine_similarity,
    load_static_vectors,
)
from .evaluate import EvalReport, evaluate
from .subword import Segmentation, SubwordVocab, load_vocab, subtoken_count, tokenize_word
from .tagger import TaggerModel, load_tagger, predict, save_tagger, train_tagger

__all__ = [
    "AnnotatorConfig",
    "EmbeddingBackend",
    "EmbeddingVector",
    "EvalReport",
    "ParsedCorpus",
    "RemoteBackend",
    "ScoredCandidate",
    "Segmentation",
    "Sentence",
    "StaticVectorBackend",
    "SubwordVocab",
    "TaggerModel",
    "TermSpan",
    "Token",
    "annotate_document",
    "annotate_sentence",
    "cosine_similarity",
    "evaluate",
    "extract_candidates",
    "filter_candidates",
    "labels_from_spans",
    "load_static_vectors",
    "load_tagger",
    "load_vocab",
    "parse_conll",
    "predict",
    "save_tagger",
    "spans_from_iob",
    "specificity_score",
    "subtoken_count",
    "tokenize_word",
    "topic_score",
    "train_tagger",
    "upgrade_nouns",
    "write_conll",
]
