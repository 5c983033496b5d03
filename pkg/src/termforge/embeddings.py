"""Pluggable text-embedding backends with cosine geometry.

Two backends share one interface: a static word-vector table (GloVe-style
file, mean-pooled over tokens) for hermetic desk-scale runs, and a remote
HTTP service speaking the ``POST /embed`` JSON contract.  Both memoize by
exact query text; the memo can be disabled for latency measurements.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import requests


class EmbeddingError(Exception):
    """Base class for embedding failures."""


class DimensionMismatchError(EmbeddingError):
    """Vectors from incompatible backends or of different lengths."""


class TransportError(EmbeddingError):
    """Remote backend unreachable or returned a transport-level failure (retriable)."""


class ProtocolError(EmbeddingError):
    """Remote backend violated the wire contract (wrong shape, wrong dimension)."""


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray
    backend_id: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("embedding values must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dimension(self) -> int:
        return self.values.shape[0]

    @property
    def is_degenerate(self) -> bool:
        """True for the all-zero vector (unembeddable text)."""
        return not np.any(self.values)


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine of the angle between two vectors; 0.0 if either is degenerate."""
    if a.backend_id != b.backend_id:
        raise DimensionMismatchError(
            f"backend mismatch: {a.backend_id!r} vs {b.backend_id!r}"
        )
    if a.dimension != b.dimension:
        raise DimensionMismatchError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    norm_a = float(np.linalg.norm(a.values))
    norm_b = float(np.linalg.norm(b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a.values, b.values) / (norm_a * norm_b))


class EmbeddingBackend:
    """Shared memoization and stats; subclasses implement `_embed_batch`."""

    kind = "abstract"

    def __init__(self, backend_id: str, dimension: int, cache_enabled: bool = True):
        self.backend_id = backend_id
        self.dimension = dimension
        self.cache_enabled = cache_enabled
        self._cache: Dict[str, EmbeddingVector] = {}
        self._cache_lock = threading.Lock()
        self.cache_hits = 0
        self.cache_misses = 0

    def embed(self, text: str) -> EmbeddingVector:
        return self.embed_many([text])[0]

    def embed_many(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        for t in texts:
            if not t:
                raise ValueError("cannot embed empty text")
        if not self.cache_enabled:
            self.cache_misses += len(texts)
            return self._embed_batch(list(texts))

        results: Dict[int, EmbeddingVector] = {}
        pending: List[int] = []
        with self._cache_lock:
            for i, t in enumerate(texts):
                hit = self._cache.get(t)
                if hit is not None:
                    results[i] = hit
                    self.cache_hits += 1
                else:
                    pending.append(i)
                    self.cache_misses += 1
        if pending:
            fresh = self._embed_batch([texts[i] for i in pending])
            with self._cache_lock:
                for i, vec in zip(pending, fresh):
                    self._cache[texts[i]] = vec
                    results[i] = vec
        return [results[i] for i in range(len(texts))]

    def _embed_batch(self, texts: List[str]) -> List[EmbeddingVector]:
        raise NotImplementedError


class StaticVectorBackend(EmbeddingBackend):
    """Word-vector table; multi-token text embeds as the mean of token vectors.

    Lookup is lowercased; unknown tokens contribute the zero vector, so text
    made only of unknown tokens yields the degenerate zero vector.
    """

    kind = "static-vectors"

    def __init__(self, table: Dict[str, np.ndarray], backend_id: str, cache_enabled: bool = True):
        if not table:
            raise ValueError("empty vector table")
        dims = {v.shape[0] for v in table.values()}
        if len(dims) != 1:
            raise ValueError(f"ragged vector dimensions: {sorted(dims)}")
        super().__init__(backend_id, dims.pop(), cache_enabled=cache_enabled)
        self._table = table
        self._zero = np.zeros(self.dimension)

    def _embed_batch(self, texts: List[str]) -> List[EmbeddingVector]:
        out = []
        for text in texts:
            tokens = text.split()
            acc = np.zeros(self.dimension)
            for tok in tokens:
                acc += self._table.get(tok.lower(), self._zero)
            acc /= max(len(tokens), 1)
            out.append(EmbeddingVector(acc, self.backend_id))
        return out


def load_static_vectors(path: Union[str, Path], cache_enabled: bool = True) -> StaticVectorBackend:
    """Load a GloVe-style text file: ``token v1 v2 ... vd`` per line, uniform d."""
    path = Path(path)
    table: Dict[str, np.ndarray] = {}
    dim: Optional[int] = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if not values:
                raise ValueError(f"{path}:{lineno}: no vector components")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} components, got {len(values)}"
                )
            table[token.lower()] = np.array([float(v) for v in values])
    if not table:
        raise ValueError(f"empty vector file: {path}")
    return StaticVectorBackend(table, backend_id=f"static:{path.name}:d{dim}", cache_enabled=cache_enabled)


class RemoteBackend(EmbeddingBackend):
    """Client for the embedding sidecar's HTTP/JSON contract.

    ``POST /embed`` with ``{"texts": [...]}`` returns ``{"model", "dimension",
    "vectors"}`` with vectors in request order.  Batches are serialized so at
    most one request per backend is in flight.
    """

    kind = "remote-service"

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        batch_size: int = 64,
        cache_enabled: bool = True,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_size = batch_size
        self._session = requests.Session()
        self._request_lock = threading.Lock()
        health = self._health()
        super().__init__(
            backend_id=f"remote:{health['model']}",
            dimension=int(health["dimension"]),
            cache_enabled=cache_enabled,
        )

    def _health(self) -> dict:
        try:
            resp = self._session.get(f"{self.base_url}/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"health check failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"service not ready: HTTP {resp.status_code}")
        body = resp.json()
        if body.get("status") != "ok" or "dimension" not in body or "model" not in body:
            raise ProtocolError(f"malformed health response: {body!r}")
        return body

    def _embed_batch(self, texts: List[str]) -> List[EmbeddingVector]:
        out: List[EmbeddingVector] = []
        for i in range(0, len(texts), self.batch_size):
            out.extend(self._post_embed(texts[i : i + self.batch_size]))
        return out

    def _post_embed(self, texts: List[str]) -> List[EmbeddingVector]:
        payload = json.dumps({"texts": texts}).encode("utf-8")
        with self._request_lock:
            try:
                resp = self._session.post(
                    f"{self.base_url}/embed",
                    data=payload,
                    headers={"Content-Type": "application/json"},
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                raise TransportError(f"embed request failed: {exc}") from exc
        if resp.status_code >= 500 or resp.status_code == 503:
            raise TransportError(f"service error: HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise ProtocolError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        body = resp.json()
        vectors = body.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProtocolError(
                f"expected {len(texts)} vectors, got "
                f"{len(vectors) if isinstance(vectors, list) else type(vectors).__name__}"
            )
        if int(body.get("dimension", -1)) != self.dimension:
            raise ProtocolError(
                f"dimension changed: {body.get('dimension')} != {self.dimension}"
            )
        out = []
        for vec in vectors:
            if len(vec) != self.dimension:
                raise ProtocolError(f"vector length {len(vec)} != dimension {self.dimension}")
            out.append(EmbeddingVector(np.array(vec, dtype=np.float64), self.backend_id))
        return out
