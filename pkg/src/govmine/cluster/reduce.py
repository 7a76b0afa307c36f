"""Embedding dimension reduction.

The reducer is pluggable.  The built-in fallback is a seeded Gaussian
random projection: it ignores the neighborhood-size parameter (which is
still recorded in model params for auditability) and preserves pairwise
distances within the usual Johnson-Lindenstrauss distortion at the
default target dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..providers.embedding import EmbeddingVector


@dataclass(frozen=True)
class ReducedEmbedding:
    values: np.ndarray
    activity_id: str


def reduce_embeddings(
    vecs: list[EmbeddingVector],
    n_neighbors: int,
    k: int,
    activity_ids: list[str] | None = None,
    seed: int = 0,
) -> list[ReducedEmbedding]:
    """Project embeddings from d dims down to k via seeded Gaussian projection.

    k == d returns the identity embedding.  n_neighbors is accepted for
    interface parity with neighborhood-manifold reducers and recorded by
    the caller; the projection itself does not use it.
    """
    if not vecs:
        return []
    d = vecs[0].dim
    if k > d:
        raise ValueError(f"target dimension k={k} exceeds source dimension d={d}")
    if len(vecs) <= k and k < d:
        raise ValueError(f"need more than k={k} points, got {len(vecs)}")
    ids = activity_ids or [str(i) for i in range(len(vecs))]
    X = np.stack([v.values for v in vecs])
    if k == d:
        Y = X
    else:
        rng = np.random.default_rng(seed)
        R = rng.standard_normal((d, k)) / np.sqrt(k)
        Y = X @ R
    return [ReducedEmbedding(values=row, activity_id=i) for row, i in zip(Y, ids)]
