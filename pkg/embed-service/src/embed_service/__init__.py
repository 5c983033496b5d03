"""Embedding sidecar: POST /embed and GET /health behind one fixed JSON contract."""

__version__ = "0.1.0"
