import json
import math
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from embed_service.app import ServiceState, create_app


@pytest.fixture
def client():
    state = ServiceState("hash:64", batch_cap=8, text_cap=50)
    state.load()
    return TestClient(create_app(state))


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    return dot / (na * nb)


class TestHealth:
    def test_ok_after_load(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["model"] == "hash-encoder-d64"
        assert body["dimension"] == 64

    def test_503_before_load_then_200(self):
        state = ServiceState("hash:64", batch_cap=8, text_cap=50)
        client = TestClient(create_app(state))  # no lifespan: encoder not loaded
        assert client.get("/health").status_code == 503
        assert client.get("/health").json() == {"status": "loading"}
        assert client.post("/embed", json={"texts": ["x"]}).status_code == 503
        state.load()
        assert client.get("/health").status_code == 200

    def test_error_state_reported(self):
        state = ServiceState("bogus:spec", batch_cap=8, text_cap=50)
        state.load()
        client = TestClient(create_app(state))
        resp = client.get("/health")
        assert resp.status_code == 503
        assert resp.json()["status"] == "error"
        assert client.post("/embed", json={"texts": ["x"]}).status_code == 503


class TestEmbed:
    def test_count_order_dimension(self, client):
        resp = client.post("/embed", json={"texts": ["alpha", "beta", "alpha"]})
        assert resp.status_code == 200
        body = resp.json()
        assert body["model"] == "hash-encoder-d64" and body["dimension"] == 64
        vectors = body["vectors"]
        assert len(vectors) == 3
        assert all(len(v) == 64 for v in vectors)
        assert vectors[0] == vectors[2] != vectors[1]
        flipped = client.post("/embed", json={"texts": ["beta", "alpha"]}).json()["vectors"]
        assert flipped[0] == vectors[1] and flipped[1] == vectors[0]

    def test_deterministic_across_requests(self, client):
        a = client.post("/embed", json={"texts": ["solar panel efficiency"]}).json()["vectors"][0]
        b = client.post("/embed", json={"texts": ["solar panel efficiency"]}).json()["vectors"][0]
        assert a == b

    def test_self_cosine_is_one(self, client):
        text = "the clinical paracetamol trial"
        a = client.post("/embed", json={"texts": [text]}).json()["vectors"][0]
        b = client.post("/embed", json={"texts": [text]}).json()["vectors"][0]
        assert cosine(a, b) == pytest.approx(1.0, abs=1e-6)

    def test_dimension_never_varies(self, client):
        dims = set()
        for texts in (["a"], ["a b c", "d"], ["longer text here okay"]):
            body = client.post("/embed", json={"texts": texts}).json()
            dims.add(body["dimension"])
            dims.update(len(v) for v in body["vectors"])
        assert dims == {64}

    def test_concurrent_requests_consistent(self, client):
        def post(i):
            texts = [f"text number {i}", "shared probe"]
            return client.post("/embed", json={"texts": texts}).json()["vectors"]

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(post, range(16)))
        probe = results[0][1]
        assert all(r[1] == probe for r in results)


class TestValidation:
    @pytest.mark.parametrize(
        "raw",
        [
            "not json at all",
            json.dumps(["texts"]),
            json.dumps({"nope": []}),
            json.dumps({"texts": "string"}),
            json.dumps({"texts": []}),
            json.dumps({"texts": [42]}),
        ],
    )
    def test_malformed_bodies_400(self, client, raw):
        resp = client.post("/embed", content=raw, headers={"Content-Type": "application/json"})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_batch_cap_400(self, client):
        resp = client.post("/embed", json={"texts": ["x"] * 9})
        assert resp.status_code == 400

    def test_text_cap_400(self, client):
        resp = client.post("/embed", json={"texts": ["y" * 51]})
        assert resp.status_code == 400

    def test_at_caps_ok(self, client):
        resp = client.post("/embed", json={"texts": ["y" * 50] * 8})
        assert resp.status_code == 200


class TestStaticEncoder:
    def test_serves_word_vectors(self, tmp_path):
        path = tmp_path / "toy.vec"
        path.write_text("alpha 1 2 2\nbeta 2 1 2\n")
        state = ServiceState(f"static:{path}", batch_cap=8, text_cap=50)
        state.load()
        client = TestClient(create_app(state))
        body = client.post("/embed", json={"texts": ["alpha", "alpha beta", "zzz"]}).json()
        assert body["dimension"] == 3
        assert body["vectors"][0] == [1.0, 2.0, 2.0]
        assert body["vectors"][1] == [1.5, 1.5, 2.0]
        assert body["vectors"][2] == [0.0, 0.0, 0.0]
