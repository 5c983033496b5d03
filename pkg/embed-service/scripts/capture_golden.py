#!/usr/bin/env python3
"""Record sidecar responses for a fixed probe set.

Writes tests/fixtures/remote_golden.json in the term-annotation package so
its remote-backend replay test can assert against responses the real
service produced.  Rerun whenever the sidecar's encoding changes.

Usage: python scripts/capture_golden.py [encoder-spec]   (default: hash)
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from embed_service.app import ServiceState, create_app

PROBES = [
    "alpha",
    "alpha beta",
    "solar panel",
    "paracetamol dosage",
    "the clinical trial reduces hepatic toxicity",
]

OUT = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "remote_golden.json"


def main() -> None:
    spec = sys.argv[1] if len(sys.argv) > 1 else "hash"
    state = ServiceState(spec, batch_cap=64, text_cap=10000)
    state.load()
    if state.error:
        raise SystemExit(f"encoder failed: {state.error}")
    client = TestClient(create_app(state))
    health = client.get("/health").json()
    responses = {}
    # two separate requests on purpose: the recording must not depend on batching
    for batch in (PROBES[:2], PROBES[2:]):
        body = client.post("/embed", json={"texts": batch}).json()
        assert body["dimension"] == health["dimension"]
        for text, vector in zip(batch, body["vectors"]):
            responses[text] = vector
    OUT.write_text(
        json.dumps(
            {"model": health["model"], "dimension": health["dimension"], "responses": responses},
            indent=1,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {OUT} ({health['model']}, d={health['dimension']})")


if __name__ == "__main__":
    main()
