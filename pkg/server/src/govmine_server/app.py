"""FastAPI application serving the v1 model contract.

Which concrete models sit behind the endpoints is deployment
configuration; this build loads the deterministic reference models
shipped with the govmine package, so the server is stateless and
identical requests always produce identical responses.  Batch order is
preserved: results[i] always corresponds to request item i, and a bad
item yields a per-item error object without affecting its neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from govmine.extract.srl import FallbackSRL, SRLFrame
from govmine.ingest.language import HeuristicLangId
from govmine.providers.embedding import HashEmbedder
from govmine.providers.pairscore import FallbackPairScorer

CONTRACT_VERSION = "1"
DEFAULT_MAX_BATCH = 64


@dataclass
class ModelBundle:
    srl: FallbackSRL
    embedder: HashEmbedder
    pair: FallbackPairScorer
    langid: HeuristicLangId


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _item_error(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _frame_to_wire(frame: SRLFrame) -> dict:
    return {
        "verb": frame.verb,
        "verb_span": list(frame.verb_span),
        "arguments": [
            {"role": a.role, "text": a.text, "span": list(a.span)}
            for a in frame.arguments
        ],
    }


async def _read_batch(request: Request, key: str, max_batch: int):
    """Returns (items, None) or (None, error response)."""
    try:
        body = await request.json()
    except Exception:
        return None, _error(400, "bad-json", "request body is not valid JSON")
    items = body.get(key) if isinstance(body, dict) else None
    if not isinstance(items, list) or not items:
        return None, _error(400, "empty-batch", f"'{key}' must be a non-empty array")
    if len(items) > max_batch:
        return None, _error(
            413, "batch-too-large",
            f"batch of {len(items)} exceeds max_batch_size {max_batch}",
        )
    return items, None


def create_app(
    embed_dim: int = 512, seed: int = 0, max_batch: int = DEFAULT_MAX_BATCH
) -> FastAPI:
    models = ModelBundle(
        srl=FallbackSRL(),
        embedder=HashEmbedder(dim=embed_dim, seed=seed),
        pair=FallbackPairScorer(HashEmbedder(dim=embed_dim, seed=seed)),
        langid=HeuristicLangId(),
    )
    app = FastAPI(title="govmine model server", version=CONTRACT_VERSION)
    app.state.models = models
    app.state.max_batch = max_batch

    @app.get("/v1/info")
    async def info() -> dict:
        return {
            "contract_version": CONTRACT_VERSION,
            "models": {
                "srl": models.srl.name,
                "embed": models.embedder.name,
                "pair": models.pair.name,
                "langid": models.langid.name,
            },
            "embedding_dim": models.embedder.dim,
            "max_batch_size": max_batch,
        }

    @app.post("/v1/srl")
    async def srl(request: Request):
        items, err = await _read_batch(request, "sentences", max_batch)
        if err is not None:
            return err
        results = []
        for sentence in items:
            if not isinstance(sentence, str) or not sentence.strip():
                results.append(_item_error("empty-input", "sentence is empty"))
                continue
            frames = models.srl.frames_for_sentence(sentence)
            results.append([_frame_to_wire(f) for f in frames])
        return {"results": results}

    @app.post("/v1/embed")
    async def embed(request: Request):
        items, err = await _read_batch(request, "texts", max_batch)
        if err is not None:
            return err
        results = []
        for text in items:
            if not isinstance(text, str) or not text.strip():
                results.append(_item_error("empty-input", "text is empty"))
                continue
            vec = models.embedder.embed_one(text)
            results.append([float(v) for v in vec.values])
        return {"results": results}

    @app.post("/v1/pair")
    async def pair(request: Request):
        items, err = await _read_batch(request, "pairs", max_batch)
        if err is not None:
            return err
        results = []
        for item in items:
            a = item.get("a") if isinstance(item, dict) else None
            b = item.get("b") if isinstance(item, dict) else None
            if not isinstance(a, str) or not isinstance(b, str):
                results.append(_item_error("bad-pair", "pair needs string fields a and b"))
                continue
            if not a.strip() or not b.strip():
                results.append(_item_error("empty-input", "pair member is empty"))
                continue
            results.append(models.pair.score_one(a, b))
        return {"results": results}

    @app.post("/v1/langid")
    async def langid(request: Request):
        items, err = await _read_batch(request, "texts", max_batch)
        if err is not None:
            return err
        results = []
        for text in items:
            if not isinstance(text, str) or not text.strip():
                results.append(_item_error("empty-input", "text is empty"))
                continue
            results.append(models.langid.identify_one(text))
        return {"results": results}

    return app
