"""In-process HTTP server speaking the embedding sidecar's wire contract.

Serves mean-pooled vectors from a static table (mirroring the static
backend's pooling) so annotations computed over HTTP agree exactly with the
in-process ones.  Also supports canned-response replay and a couple of
fault-injection knobs for protocol tests.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, List, Optional


class _Handler(BaseHTTPRequestHandler):
    def _send(self, status: int, body: dict) -> None:
        payload = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):
        service = self.server.service
        if self.path != "/health":
            self._send(404, {"error": "not found"})
            return
        if service.loading:
            self._send(503, {"status": "loading"})
            return
        self._send(
            200, {"status": "ok", "model": service.model, "dimension": service.dimension}
        )

    def do_POST(self):
        service = self.server.service
        if self.path != "/embed":
            self._send(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            body = json.loads(self.rfile.read(length))
            texts = body["texts"]
        except (ValueError, KeyError):
            self._send(400, {"error": "malformed body"})
            return
        service.requests.append(list(texts))
        vectors = [service.embed(t) for t in texts]
        self._send(
            200,
            {
                "model": service.model,
                "dimension": service.lie_dimension or service.dimension,
                "vectors": vectors,
            },
        )

    def log_message(self, *args):
        pass


class StubEmbedService:
    """table maps lowercased tokens to vectors; replay maps whole texts."""

    def __init__(
        self,
        table: Optional[Dict[str, List[float]]] = None,
        replay: Optional[Dict[str, List[float]]] = None,
        model: str = "stub-encoder",
    ):
        if (table is None) == (replay is None):
            raise ValueError("pass exactly one of table or replay")
        self.table = table
        self.replay = replay
        self.model = model
        source = table if table is not None else replay
        self.dimension = len(next(iter(source.values())))
        self.loading = False
        self.lie_dimension: Optional[int] = None
        self.requests: List[List[str]] = []
        self._server: Optional[ThreadingHTTPServer] = None
        self._thread: Optional[threading.Thread] = None

    def embed(self, text: str) -> List[float]:
        if self.replay is not None:
            return self.replay[text]
        tokens = text.split()
        acc = [0.0] * self.dimension
        for token in tokens:
            vec = self.table.get(token.lower())
            if vec:
                acc = [a + v for a, v in zip(acc, vec)]
        n = max(len(tokens), 1)
        return [a / n for a in acc]

    def start(self) -> str:
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._server.service = self
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def stop(self) -> None:
        if self._server:
            self._server.shutdown()
            self._server.server_close()
            self._thread.join()

    def __enter__(self) -> str:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
