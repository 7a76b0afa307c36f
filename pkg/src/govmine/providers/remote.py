"""HTTP clients for the model-server sidecar.

Each client implements the same protocol as its fallback counterpart,
auto-chunking batches to the cap advertised at GET /v1/info.  The wire
format is plain JSON; see contract/model-server-v1.json.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from typing import Sequence

import numpy as np

from ..extract.srl import Argument, SRLFrame
from .embedding import EmbeddingVector

DEFAULT_TIMEOUT = 30.0


class RemoteProviderError(RuntimeError):
    pass


class ModelServerClient:
    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._info: dict | None = None

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        url = f"{self.base_url}{path}"
        data = None if body is None else json.dumps(body).encode("utf-8")
        req = urllib.request.Request(
            url, data=data, method=method,
            headers={"Content-Type": "application/json"},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            try:
                detail = json.loads(exc.read().decode("utf-8"))
                message = detail.get("message", str(exc))
            except Exception:
                message = str(exc)
            raise RemoteProviderError(f"{path}: {message}") from exc
        except urllib.error.URLError as exc:
            raise RemoteProviderError(f"model server unreachable at {url}: {exc.reason}") from exc

    def info(self) -> dict:
        if self._info is None:
            self._info = self._request("GET", "/v1/info")
        return self._info

    @property
    def batch_cap(self) -> int:
        return int(self.info().get("max_batch_size", 64))

    def _chunked(self, path: str, key: str, items: list) -> list:
        out: list = []
        cap = self.batch_cap
        for i in range(0, len(items), cap):
            resp = self._request("POST", path, {key: items[i : i + cap]})
            part = resp["results"]
            if len(part) != len(items[i : i + cap]):
                raise RemoteProviderError(f"{path}: response length mismatch")
            out.extend(part)
        return out


def _frame_from_wire(obj: dict) -> SRLFrame:
    return SRLFrame(
        verb=obj["verb"],
        verb_span=(int(obj["verb_span"][0]), int(obj["verb_span"][1])),
        arguments=tuple(
            Argument(role=a["role"], text=a["text"], span=(int(a["span"][0]), int(a["span"][1])))
            for a in obj.get("arguments", [])
        ),
    )


class RemoteSRL:
    name = "remote-srl"

    def __init__(self, client: ModelServerClient) -> None:
        self.client = client

    def frames_batch(self, sentences: Sequence[str]) -> list[list[SRLFrame]]:
        results = self.client._chunked("/v1/srl", "sentences", list(sentences))
        out: list[list[SRLFrame]] = []
        for item in results:
            if isinstance(item, dict) and "error" in item:
                raise RemoteProviderError(f"srl item failed: {item['error']['message']}")
            out.append([_frame_from_wire(f) for f in item])
        return out

    def frames_for_sentence(self, sentence: str) -> list[SRLFrame]:
        return self.frames_batch([sentence])[0]


class RemoteEmbedder:
    name = "remote-embed"

    def __init__(self, client: ModelServerClient) -> None:
        self.client = client

    @property
    def dim(self) -> int:
        return int(self.client.info()["embedding_dim"])

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        results = self.client._chunked("/v1/embed", "texts", list(texts))
        out = []
        for item in results:
            if isinstance(item, dict) and "error" in item:
                raise RemoteProviderError(f"embed item failed: {item['error']['message']}")
            out.append(EmbeddingVector(np.asarray(item, dtype=np.float64)))
        return out

    def embed_one(self, text: str) -> EmbeddingVector:
        return self.embed_batch([text])[0]


class RemotePairScorer:
    name = "remote-pair"

    def __init__(self, client: ModelServerClient) -> None:
        self.client = client

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        wire = [{"a": a, "b": b} for a, b in pairs]
        results = self.client._chunked("/v1/pair", "pairs", wire)
        out = []
        for item in results:
            if isinstance(item, dict) and "error" in item:
                raise RemoteProviderError(f"pair item failed: {item['error']['message']}")
            score = float(item)
            if not 0.0 <= score <= 1.0:
                raise RemoteProviderError(f"pair score outside [0,1]: {score}")
            out.append(score)
        return out

    def score_one(self, a: str, b: str) -> float:
        return self.score_batch([(a, b)])[0]


class RemoteLangId:
    name = "remote-langid"

    def __init__(self, client: ModelServerClient) -> None:
        self.client = client

    def identify_batch(self, texts: Sequence[str]) -> list[str]:
        results = self.client._chunked("/v1/langid", "texts", list(texts))
        out = []
        for item in results:
            if isinstance(item, dict) and "error" in item:
                raise RemoteProviderError(f"langid item failed: {item['error']['message']}")
            out.append(str(item))
        return out

    def identify_one(self, text: str) -> str:
        return self.identify_batch([text])[0]
