"""Sentence embedding providers.

The built-in fallback hashes token presence features into a fixed number
of buckets.  It needs no model download, is fully deterministic for a
given (seed, dim), and supports the cosine-based scoring used downstream.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

DEFAULT_DIM = 512
DEFAULT_SEED = 0

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    norm: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "norm", float(np.linalg.norm(self.values)))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding contains non-finite entries")

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def cosine(self, other: "EmbeddingVector") -> float:
        denom = self.norm * other.norm
        if denom == 0.0:
            return 0.0
        return float(np.dot(self.values, other.values) / denom)


class EmbedProvider(Protocol):
    name: str

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


def _bucket(token: str, dim: int, seed: int) -> int:
    # hashlib rather than hash(): stable across interpreter runs
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=str(seed).encode()
    ).digest()
    return int.from_bytes(digest, "big") % dim


class HashEmbedder:
    """Feature-hashed token-presence embedder, L2-normalized.

    Features are binary (a bucket is 1 if any of its tokens occurs).
    Presence rather than counts keeps pair scores monotone in token
    overlap, which downstream seed-assignment thresholds rely on.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED) -> None:
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.seed = seed
        self.name = f"hash-embed-d{dim}-s{seed}"

    def embed_one(self, text: str) -> EmbeddingVector:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        vec = np.zeros(self.dim, dtype=np.float64)
        for tok in set(tokenize(text)):
            vec[_bucket(tok, self.dim, self.seed)] = 1.0
        n = math.sqrt(float(np.dot(vec, vec)))
        if n > 0:
            vec /= n
        return EmbeddingVector(vec)

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self.embed_one(t) for t in texts]
