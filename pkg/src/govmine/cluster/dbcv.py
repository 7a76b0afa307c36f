"""Density-based clustering validity (DBCV).

Density sparseness within each cluster is compared against density
separation between clusters over mutual-reachability distances built
from all-points core distances; per-cluster validities aggregate
weighted by cluster size over all points (noise included).  The score
lies in [-1, 1].
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .hdbscan_ import ClusterModel, pairwise_distances


def all_points_core_distance(dist_block: np.ndarray, dim: int) -> np.ndarray:
    """Inverse-density core distance of each point w.r.t. its own cluster."""
    n = dist_block.shape[0]
    core = np.zeros(n)
    for i in range(n):
        d = np.delete(dist_block[i], i)
        if np.any(d == 0.0):
            core[i] = 0.0
            continue
        # log-space evaluation: (1/d)**dim overflows float64 for small d
        # when the embedding dimension is large
        log_terms = dim * (-np.log(d))
        log_mean = logsumexp(log_terms) - np.log(n - 1)
        core[i] = np.exp(-log_mean / dim)
    return core


def _canonical_order(block: np.ndarray) -> np.ndarray:
    """Permutation sorting points lexicographically by coordinates.

    Indexing the tie rule below through this ordering makes the score a
    function of the point set alone, independent of input order.
    """
    return np.lexsort(block.T[::-1])


def _canonical_mst(weights: np.ndarray) -> list[tuple[int, int, float]]:
    """Kruskal MST with ties broken toward lexicographically smallest edges.

    Mutual-reachability graphs carry many exactly tied weights (edges
    dominated by one point's core distance), so the MST is not unique;
    fixing the tie rule makes DBCV reproducible across implementations.
    """
    n = weights.shape[0]
    edges = sorted(
        (weights[i, j], i, j) for i in range(n) for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out: list[tuple[int, int, float]] = []
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            out.append((i, j, w))
            if len(out) == n - 1:
                break
    return out


def _cluster_mst_stats(dist_block: np.ndarray, core: np.ndarray, block: np.ndarray):
    """(sparseness, internal point mask) for one cluster."""
    n = dist_block.shape[0]
    order = _canonical_order(block)
    inv = np.empty(n, dtype=np.int64)
    inv[order] = np.arange(n)
    mrd = np.maximum(np.maximum(core[:, None], core[None, :]), dist_block)
    mrd = mrd[np.ix_(order, order)]
    edges = _canonical_mst(mrd)
    degree = np.zeros(n, dtype=int)
    for u, v, _ in edges:
        degree[u] += 1
        degree[v] += 1
    internal = degree >= 2
    internal_edges = [w for u, v, w in edges if internal[u] and internal[v]]
    if internal_edges:
        sparseness = max(internal_edges)
    else:
        sparseness = max(w for _, _, w in edges)
    if not internal.any():
        internal = np.ones(n, dtype=bool)
    return sparseness, internal[inv]


def compute_dbcv(model: ClusterModel, pts) -> float:
    """DBCV of a fitted model; requires at least 2 non-outlier clusters."""
    if hasattr(pts[0], "values"):
        X = np.stack([p.values for p in pts])
    else:
        X = np.asarray(pts, dtype=np.float64)
    labels = np.asarray(model.labels)
    cluster_ids = sorted(set(labels[labels >= 0].tolist()))
    if len(cluster_ids) < 2:
        raise ValueError("validity undefined: fewer than 2 clusters")
    n_total = len(labels)
    dim = X.shape[1]
    dist = pairwise_distances(X)

    members = {c: np.where(labels == c)[0] for c in cluster_ids}
    core = {}
    sparseness = {}
    internal = {}
    for c, idx in members.items():
        if len(idx) < 2:
            core[c] = np.zeros(len(idx))
            sparseness[c] = 0.0
            internal[c] = np.ones(len(idx), dtype=bool)
            continue
        block = dist[np.ix_(idx, idx)]
        core[c] = all_points_core_distance(block, dim)
        sparseness[c], internal[c] = _cluster_mst_stats(block, core[c], X[idx])

    score = 0.0
    for c in cluster_ids:
        idx_c = members[c][internal[c]]
        core_c = core[c][internal[c]]
        min_sep = np.inf
        for o in cluster_ids:
            if o == c:
                continue
            idx_o = members[o][internal[o]]
            core_o = core[o][internal[o]]
            block = dist[np.ix_(idx_c, idx_o)]
            mrd = np.maximum(np.maximum(core_c[:, None], core_o[None, :]), block)
            min_sep = min(min_sep, float(mrd.min()))
        spars = sparseness[c]
        denom = max(min_sep, spars)
        validity = 0.0 if denom == 0.0 else (min_sep - spars) / denom
        score += (len(members[c]) / n_total) * validity
    return float(score)
