"""DBCV-driven hyperparameter search.

Fits every (min_cluster_size, min_samples, n_neighbors) combination in
the grid and keeps the argmax-DBCV model; exact ties break toward the
lexicographically smallest parameter triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..providers.embedding import EmbeddingVector
from .dbcv import compute_dbcv
from .hdbscan_ import ClusterModel, fit_density_clusters
from .reduce import reduce_embeddings

DEFAULT_RANGE = list(range(10, 101, 10))


@dataclass
class ParameterGrid:
    min_cluster_size: list[int] = field(default_factory=lambda: list(DEFAULT_RANGE))
    min_samples: list[int] = field(default_factory=lambda: list(DEFAULT_RANGE))
    n_neighbors: list[int] = field(default_factory=lambda: list(DEFAULT_RANGE))

    def combinations(self) -> list[tuple[int, int, int]]:
        return [
            (mcs, ms, nn)
            for mcs in sorted(self.min_cluster_size)
            for ms in sorted(self.min_samples)
            for nn in sorted(self.n_neighbors)
        ]


def select_model(
    vecs: list[EmbeddingVector] | np.ndarray,
    grid: ParameterGrid,
    reduce_dim: int | None = None,
    activity_ids: list[str] | None = None,
    seed: int = 0,
) -> ClusterModel:
    """Best-DBCV model over the grid; raises if no combination is valid."""
    combos = grid.combinations()
    if not combos:
        raise ValueError("empty parameter grid")
    best: tuple[float, tuple[int, int, int], ClusterModel] | None = None
    cache: dict[int, list] = {}
    for mcs, ms, nn in combos:
        if nn not in cache:
            if isinstance(vecs, np.ndarray) or not hasattr(vecs[0], "norm"):
                pts = np.asarray(vecs, dtype=np.float64)
                if reduce_dim is not None and reduce_dim < pts.shape[1]:
                    emb = [EmbeddingVector(v) for v in pts]
                    pts = reduce_embeddings(emb, nn, reduce_dim,
                                            activity_ids, seed=seed)
            else:
                k = reduce_dim if reduce_dim is not None else vecs[0].dim
                pts = reduce_embeddings(vecs, nn, k, activity_ids, seed=seed)
            cache[nn] = pts
        pts = cache[nn]
        try:
            model = fit_density_clusters(
                pts, mcs, ms, extra_params={"n_neighbors": nn}
            )
            score = compute_dbcv(model, pts)
        except ValueError:
            continue
        model.validity = score
        key = (score, (-mcs, -ms, -nn))
        if best is None or key > (best[0], tuple(-p for p in best[1])):
            best = (score, (mcs, ms, nn), model)
    if best is None:
        raise ValueError("no grid combination produced a valid clustering")
    return best[2]
