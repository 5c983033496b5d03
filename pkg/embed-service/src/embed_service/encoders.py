"""Encoder backends for the sidecar.

Selected by the EMBED_SERVICE_ENCODER env var:

  st:<model-name>   sentence-transformers model (the default; needs the
                    model weights available locally or downloadable)
  hash[:<dim>]      deterministic signed feature hashing over tokens and
                    character trigrams; runs anywhere, no downloads
  static:<path>     mean of word vectors from a GloVe-style text file

Every encoder is deterministic for a fixed configuration.
"""

from __future__ import annotations

import hashlib
import threading
from typing import List, Sequence

import numpy as np


class EncoderError(RuntimeError):
    pass


class Encoder:
    name: str = "abstract"
    dimension: int = 0

    def encode(self, texts: Sequence[str]) -> List[List[float]]:
        raise NotImplementedError


class HashEncoder(Encoder):
    """Signed feature hashing of tokens and character trigrams, mean-pooled
    over tokens and L2-normalized.  No model artifacts required."""

    def __init__(self, dimension: int = 384):
        if dimension < 8:
            raise EncoderError(f"hash dimension too small: {dimension}")
        self.dimension = dimension
        self.name = f"hash-encoder-d{dimension}"

    def _bucket(self, feature: str) -> tuple:
        digest = hashlib.md5(feature.encode("utf-8")).digest()
        index = int.from_bytes(digest[:4], "little") % self.dimension
        sign = 1.0 if digest[4] & 1 else -1.0
        return index, sign

    def _token_vector(self, token: str) -> np.ndarray:
        vec = np.zeros(self.dimension)
        padded = f"^{token}$"
        features = [f"tok={token}"] + [
            f"tri={padded[i:i + 3]}" for i in range(len(padded) - 2)
        ]
        for feature in features:
            index, sign = self._bucket(feature)
            vec[index] += sign
        return vec

    def encode(self, texts: Sequence[str]) -> List[List[float]]:
        out = []
        for text in texts:
            tokens = text.lower().split()
            acc = np.zeros(self.dimension)
            for token in tokens:
                acc += self._token_vector(token)
            if tokens:
                acc /= len(tokens)
            norm = float(np.linalg.norm(acc))
            if norm > 0:
                acc /= norm
            out.append([float(x) for x in acc])
        return out


class StaticVectorEncoder(Encoder):
    """Mean of per-token word vectors; unknown tokens contribute zeros."""

    def __init__(self, path: str):
        table = {}
        dim = None
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                parts = line.split()
                if not parts:
                    continue
                token, values = parts[0], parts[1:]
                if dim is None:
                    dim = len(values)
                elif len(values) != dim:
                    raise EncoderError(f"{path}:{lineno}: ragged vector dimensions")
                table[token.lower()] = np.array([float(v) for v in values])
        if not table:
            raise EncoderError(f"empty vector file: {path}")
        self._table = table
        self.dimension = dim
        self.name = f"static-vectors-d{dim}"
        self._zero = np.zeros(dim)

    def encode(self, texts: Sequence[str]) -> List[List[float]]:
        out = []
        for text in texts:
            tokens = text.split()
            acc = np.zeros(self.dimension)
            for token in tokens:
                acc += self._table.get(token.lower(), self._zero)
            acc /= max(len(tokens), 1)
            out.append([float(x) for x in acc])
        return out


class SentenceTransformerEncoder(Encoder):
    """Pretrained sentence encoder; inference runs in eval mode (deterministic)."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                "sentence-transformers is not installed; pip install 'embed-service[st]'"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name, device="cpu")
        except Exception as exc:
            raise EncoderError(f"could not load encoder {model_name!r}: {exc}") from exc
        self.name = model_name
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: Sequence[str]) -> List[List[float]]:
        vectors = self._model.encode(
            list(texts), convert_to_numpy=True, show_progress_bar=False
        )
        return [[float(x) for x in row] for row in vectors]


class SerializedEncoder(Encoder):
    """Wraps an encoder with a lock: one inference batch at a time."""

    def __init__(self, inner: Encoder):
        self._inner = inner
        self._lock = threading.Lock()
        self.name = inner.name
        self.dimension = inner.dimension

    def encode(self, texts: Sequence[str]) -> List[List[float]]:
        with self._lock:
            return self._inner.encode(texts)


def build_encoder(spec: str) -> Encoder:
    """Instantiate the encoder named by an EMBED_SERVICE_ENCODER value."""
    if spec.startswith("st:"):
        inner = SentenceTransformerEncoder(spec[3:])
    elif spec == "hash":
        inner = HashEncoder()
    elif spec.startswith("hash:"):
        inner = HashEncoder(dimension=int(spec[5:]))
    elif spec.startswith("static:"):
        inner = StaticVectorEncoder(spec[7:])
    else:
        raise EncoderError(f"unknown encoder spec {spec!r}")
    return SerializedEncoder(inner)
