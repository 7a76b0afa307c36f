"""Contract conformance tests for the model server.

Every response shape is validated against the shared versioned contract
file, and one integration test drives the govmine remote-provider
clients against a live server instance over HTTP.
"""

import json
import socket
import threading
import time
from pathlib import Path

import jsonschema
import pytest
import uvicorn
from fastapi.testclient import TestClient

from govmine_server.app import create_app

REPO = Path(__file__).resolve().parent.parent.parent
CONTRACT = json.loads((REPO / "contract" / "model-server-v1.json").read_text())

TABLE_SENTENCE = (
    "After a vote has finished, the ipmc must send a notice email to the board "
    "and then wait for 72 hours before inviting the proposed member"
)


def _schema(endpoint, direction):
    spec = CONTRACT["endpoints"][endpoint][direction]
    return {**spec, "$defs": CONTRACT["$defs"]}


def _validate(endpoint, direction, payload):
    jsonschema.validate(payload, _schema(endpoint, direction))


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(embed_dim=64, max_batch=8))


class TestInfo:
    def test_schema_and_advertised_values(self, client):
        resp = client.get("/v1/info")
        assert resp.status_code == 200
        body = resp.json()
        _validate("GET /v1/info", "response", body)
        assert body["contract_version"] == "1"
        assert body["embedding_dim"] == 64
        assert body["max_batch_size"] == 8


class TestSrl:
    def test_table_sentence_two_frames(self, client):
        resp = client.post("/v1/srl", json={"sentences": [TABLE_SENTENCE]})
        body = resp.json()
        _validate("POST /v1/srl", "response", body)
        (frames,) = body["results"]
        assert [f["verb"] for f in frames] == ["send", "wait"]
        tmp = [a["text"].lower() for f in frames for a in f["arguments"]
               if a["role"] == "ARGM-TMP"]
        assert "after a vote has finished" in tmp

    def test_spans_index_into_sentence(self, client):
        resp = client.post("/v1/srl", json={"sentences": [TABLE_SENTENCE]})
        (frames,) = resp.json()["results"]
        for f in frames:
            a, b = f["verb_span"]
            assert TABLE_SENTENCE[a:b] == f["verb"]

    def test_verbless_string_empty_list(self, client):
        resp = client.post("/v1/srl", json={"sentences": ["ok thanks"]})
        assert resp.json()["results"] == [[]]

    def test_empty_item_isolated(self, client):
        resp = client.post("/v1/srl",
                           json={"sentences": ["The release passed.", "", "ok"]})
        body = resp.json()
        _validate("POST /v1/srl", "response", body)
        first, second, third = body["results"]
        assert len(first) == 1
        assert second["error"]["code"] == "empty-input"
        assert third == []


class TestEmbed:
    def test_advertised_dimension_and_finiteness(self, client):
        resp = client.post("/v1/embed", json={"texts": ["the release vote"]})
        body = resp.json()
        _validate("POST /v1/embed", "response", body)
        (vec,) = body["results"]
        assert len(vec) == 64
        assert all(isinstance(v, float) for v in vec)

    def test_index_alignment(self, client):
        texts = ["alpha beta", "gamma delta", "alpha beta"]
        resp = client.post("/v1/embed", json={"texts": texts})
        r = resp.json()["results"]
        assert r[0] == r[2]
        assert r[0] != r[1]

    def test_empty_item_isolated(self, client):
        resp = client.post("/v1/embed", json={"texts": ["x", "  "]})
        r = resp.json()["results"]
        assert len(r[0]) == 64
        assert r[1]["error"]["code"] == "empty-input"


class TestPair:
    def test_self_pair_high(self, client):
        s = "the ipmc must send a notice email to the board"
        resp = client.post("/v1/pair", json={"pairs": [{"a": s, "b": s}]})
        body = resp.json()
        _validate("POST /v1/pair", "response", body)
        assert body["results"][0] >= 0.95

    def test_scores_bounded(self, client):
        pairs = [{"a": "vote now", "b": "merge later"},
                 {"a": "alpha", "b": "omega"}]
        resp = client.post("/v1/pair", json={"pairs": pairs})
        for s in resp.json()["results"]:
            assert 0.0 <= s <= 1.0

    def test_malformed_pair_isolated(self, client):
        resp = client.post("/v1/pair",
                           json={"pairs": [{"a": "x", "b": "y"}, {"a": "x"}]})
        r = resp.json()["results"]
        assert isinstance(r[0], float)
        assert r[1]["error"]["code"] == "bad-pair"


class TestLangid:
    def test_french(self, client):
        resp = client.post("/v1/langid",
                           json={"texts": ["bonjour tout le monde"]})
        body = resp.json()
        _validate("POST /v1/langid", "response", body)
        assert body["results"] == ["fr"]

    def test_english(self, client):
        resp = client.post("/v1/langid",
                           json={"texts": ["we should vote on the release"]})
        assert resp.json()["results"] == ["en"]


class TestBatchErrors:
    @pytest.mark.parametrize("path,key", [
        ("/v1/srl", "sentences"), ("/v1/embed", "texts"),
        ("/v1/pair", "pairs"), ("/v1/langid", "texts"),
    ])
    def test_empty_batch_400(self, client, path, key):
        resp = client.post(path, json={key: []})
        assert resp.status_code == 400
        jsonschema.validate(resp.json(),
                            {**CONTRACT["$defs"]["endpoint_error"],
                             "$defs": CONTRACT["$defs"]})

    def test_missing_key_400(self, client):
        resp = client.post("/v1/srl", json={"wrong": ["x"]})
        assert resp.status_code == 400

    def test_oversize_batch_413(self, client):
        resp = client.post("/v1/langid", json={"texts": ["hello"] * 9})
        assert resp.status_code == 413
        assert resp.json()["code"] == "batch-too-large"


class TestDeterminism:
    def test_identical_requests_identical_bodies(self, client):
        payloads = [
            ("/v1/srl", {"sentences": [TABLE_SENTENCE, "The release passed."]}),
            ("/v1/embed", {"texts": ["vote on the release"]}),
            ("/v1/pair", {"pairs": [{"a": "vote now", "b": "vote soon"}]}),
            ("/v1/langid", {"texts": ["bonjour tout le monde", "hello there"]}),
        ]
        for path, body in payloads:
            first = client.post(path, json=body).content
            second = client.post(path, json=body).content
            assert first == second


@pytest.fixture(scope="module")
def live_server():
    """A real uvicorn instance on an ephemeral localhost port."""
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port,
                            log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server failed to start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestPrimaryClientIntegration:
    """The govmine remote providers speak to a live server over HTTP."""

    def test_remote_srl(self, live_server):
        from govmine.providers.remote import ModelServerClient, RemoteSRL

        srl = RemoteSRL(ModelServerClient(live_server))
        frames = srl.frames_for_sentence(TABLE_SENTENCE)
        assert [f.verb for f in frames] == ["send", "wait"]

    def test_remote_embed_chunks_past_batch_cap(self, live_server):
        from govmine.providers.remote import ModelServerClient, RemoteEmbedder

        embedder = RemoteEmbedder(ModelServerClient(live_server))
        texts = [f"the vote number {i}" for i in range(150)]  # cap is 64
        vecs = embedder.embed_batch(texts)
        assert len(vecs) == 150
        assert vecs[0].dim == embedder.dim == 512

    def test_remote_pair_and_langid(self, live_server):
        from govmine.providers.remote import (
            ModelServerClient,
            RemoteLangId,
            RemotePairScorer,
        )

        client = ModelServerClient(live_server)
        assert RemotePairScorer(client).score_one("vote now", "vote now") == 1.0
        assert RemoteLangId(client).identify_one("bonjour tout le monde") == "fr"

    def test_remote_matches_fallback_exactly(self, live_server):
        # the same reference models sit behind both provider modes, so
        # remote and fallback scores agree bit for bit
        from govmine.providers.embedding import HashEmbedder
        from govmine.providers.remote import ModelServerClient, RemoteEmbedder

        remote = RemoteEmbedder(ModelServerClient(live_server))
        local = HashEmbedder()
        text = "the release manager must send the artifacts"
        assert remote.embed_one(text).values.tolist() == \
            local.embed_one(text).values.tolist()
