"""HTTP surface of the sidecar.

Wire contract (UTF-8, application/json):

  POST /embed   {"texts": ["...", ...]}
                -> 200 {"model": str, "dimension": int, "vectors": [[float, ...], ...]}
                   vectors in request order, one per input text
                -> 400 on a malformed body or a cap violation
                -> 503 while the encoder is loading (or failed to load)
  GET  /health  -> 200 {"status": "ok", "model": str, "dimension": int}
                -> 503 {"status": "loading"} or {"status": "error", "error": str}

Configuration (env):
  EMBED_SERVICE_ENCODER    encoder spec (see encoders.py); default
                           "st:sentence-transformers/all-MiniLM-L6-v2"
  EMBED_SERVICE_BATCH_CAP  max texts per request (default 256)
  EMBED_SERVICE_TEXT_CAP   max characters per text (default 10000)
"""

from __future__ import annotations

import json
import logging
import os
import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .encoders import Encoder, EncoderError, build_encoder

log = logging.getLogger("embed_service")

DEFAULT_ENCODER = "st:sentence-transformers/all-MiniLM-L6-v2"


class ServiceState:
    def __init__(self, encoder_spec: str, batch_cap: int, text_cap: int):
        self.encoder_spec = encoder_spec
        self.batch_cap = batch_cap
        self.text_cap = text_cap
        self.encoder: Encoder | None = None
        self.error: str | None = None
        self._load_lock = threading.Lock()

    def load(self) -> None:
        with self._load_lock:
            if self.encoder is not None or self.error is not None:
                return
            try:
                self.encoder = build_encoder(self.encoder_spec)
                log.info(
                    "encoder ready: %s (dimension %d)",
                    self.encoder.name,
                    self.encoder.dimension,
                )
            except EncoderError as exc:
                self.error = str(exc)
                log.error("encoder failed to load: %s", exc)


def create_app(state: ServiceState | None = None) -> FastAPI:
    if state is None:
        state = ServiceState(
            encoder_spec=os.environ.get("EMBED_SERVICE_ENCODER", DEFAULT_ENCODER),
            batch_cap=int(os.environ.get("EMBED_SERVICE_BATCH_CAP", "256")),
            text_cap=int(os.environ.get("EMBED_SERVICE_TEXT_CAP", "10000")),
        )
    @asynccontextmanager
    async def lifespan(_app):
        threading.Thread(target=state.load, daemon=True).start()
        yield

    app = FastAPI(title="embed-service", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.service = state

    @app.get("/health")
    def health():
        if state.error is not None:
            return JSONResponse({"status": "error", "error": state.error}, status_code=503)
        if state.encoder is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        return {
            "status": "ok",
            "model": state.encoder.name,
            "dimension": state.encoder.dimension,
        }

    @app.post("/embed")
    async def embed(request: Request):
        if state.encoder is None:
            detail = state.error or "encoder is loading"
            return JSONResponse({"error": detail}, status_code=503)
        try:
            body = json.loads(await request.body())
        except (ValueError, UnicodeDecodeError):
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        if not isinstance(body, dict) or "texts" not in body:
            return JSONResponse({"error": "body must be an object with 'texts'"}, status_code=400)
        texts = body["texts"]
        if not isinstance(texts, list) or not texts:
            return JSONResponse({"error": "'texts' must be a non-empty list"}, status_code=400)
        if len(texts) > state.batch_cap:
            return JSONResponse(
                {"error": f"batch of {len(texts)} exceeds cap {state.batch_cap}"},
                status_code=400,
            )
        for i, text in enumerate(texts):
            if not isinstance(text, str):
                return JSONResponse({"error": f"texts[{i}] is not a string"}, status_code=400)
            if len(text) > state.text_cap:
                return JSONResponse(
                    {"error": f"texts[{i}] exceeds {state.text_cap} characters"},
                    status_code=400,
                )
        vectors = state.encoder.encode(texts)
        return {
            "model": state.encoder.name,
            "dimension": state.encoder.dimension,
            "vectors": vectors,
        }

    return app
