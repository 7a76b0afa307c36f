"""Pairwise semantic scoring providers.

Scores live on [0, 1].  The fallback maps the hash-embedding cosine
affinely: score = (cos + 1) / 2, clamped.  Remote scorers return scores
already on [0, 1] and are used as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .embedding import HashEmbedder


@dataclass(frozen=True)
class PairScore:
    a_id: str
    b_id: str
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"pair score {self.score} outside [0,1]")


class PairProvider(Protocol):
    name: str

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]: ...


def cosine_to_unit(cos: float) -> float:
    return min(1.0, max(0.0, (cos + 1.0) / 2.0))


class FallbackPairScorer:
    def __init__(self, embedder: HashEmbedder | None = None) -> None:
        self.embedder = embedder or HashEmbedder()
        self.name = f"fallback-pair({self.embedder.name})"

    def score_one(self, a: str, b: str) -> float:
        if not a.strip() or not b.strip():
            raise ValueError("cannot score empty text")
        va = self.embedder.embed_one(a)
        vb = self.embedder.embed_one(b)
        return cosine_to_unit(va.cosine(vb))

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        return [self.score_one(a, b) for a, b in pairs]


def score_pair(a: str, b: str, provider: PairProvider, a_id: str = "a", b_id: str = "b") -> PairScore:
    (score,) = provider.score_batch([(a, b)])
    return PairScore(a_id=a_id, b_id=b_id, score=score)
