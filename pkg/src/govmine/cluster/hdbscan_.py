"""Hierarchical density-based clustering.

Full procedure: per-point core distances (distance to the
min_samples-th neighbor, self included), mutual-reachability distances,
a minimum spanning tree over them, single-linkage hierarchy, condensed
cluster tree at min_cluster_size, and excess-of-mass cluster selection.
Points in no stable cluster are labeled OUTLIER (-1).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

OUTLIER = -1


@dataclass
class ClusterModel:
    params: dict
    labels: np.ndarray                 # -1 for outliers
    activity_ids: list[str] = field(default_factory=list)
    validity: float | None = None

    @property
    def n_clusters(self) -> int:
        return len(set(self.labels[self.labels >= 0].tolist()))

    def label_of(self, activity_id: str) -> int:
        return int(self.labels[self.activity_ids.index(activity_id)])


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)


def core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to the min_samples-th nearest neighbor, counting the point."""
    n = dist.shape[0]
    k = min(min_samples, n)
    part = np.partition(dist, k - 1, axis=1)
    return part[:, k - 1]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    return np.maximum(np.maximum(core[:, None], core[None, :]), dist)


def minimum_spanning_tree(weights: np.ndarray) -> list[tuple[int, int, float]]:
    """Prim's algorithm on a dense weight matrix; returns (u, v, w) edges."""
    n = weights.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=np.int64)
    edges: list[tuple[int, int, float]] = []
    current = 0
    in_tree[0] = True
    for _ in range(n - 1):
        row = weights[current]
        update = (~in_tree) & (row < best)
        best[update] = row[update]
        best_from[update] = current
        best_masked = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(best_masked))
        edges.append((int(best_from[nxt]), nxt, float(best[nxt])))
        in_tree[nxt] = True
        current = nxt
    return edges


def single_linkage(edges: list[tuple[int, int, float]], n: int) -> np.ndarray:
    """Scipy-style linkage rows (left, right, dist, size) from sorted MST edges."""
    order = sorted(range(len(edges)), key=lambda i: edges[i][2])
    parent = list(range(2 * n - 1))
    size = [1] * (2 * n - 1)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    linkage = np.zeros((n - 1, 4))
    nxt = n
    for row, i in enumerate(order):
        u, v, w = edges[i]
        ru, rv = find(u), find(v)
        linkage[row] = (ru, rv, w, size[ru] + size[rv])
        size[nxt] = size[ru] + size[rv]
        parent[ru] = nxt
        parent[rv] = nxt
        nxt += 1
    return linkage


@dataclass
class CondensedTree:
    # rows: (parent, child, lambda_val, child_size); child < n_points => leaf
    rows: list[tuple[int, int, float, int]]
    n_points: int
    root: int


def condense_tree(linkage: np.ndarray, min_cluster_size: int) -> CondensedTree:
    n = linkage.shape[0] + 1
    root = 2 * n - 2
    rows: list[tuple[int, int, float, int]] = []
    relabel = {root: n}
    next_label = n + 1
    ignore: set[int] = set()

    def bfs_leaves(node: int) -> list[int]:
        out, stack = [], [node]
        while stack:
            cur = stack.pop()
            if cur < n:
                out.append(cur)
            else:
                row = linkage[cur - n]
                stack.extend((int(row[0]), int(row[1])))
        return out

    # iterative BFS over internal nodes from the root
    queue = [root]
    while queue:
        node = queue.pop(0)
        if node in ignore or node < n:
            continue
        row = linkage[node - n]
        left, right, dist = int(row[0]), int(row[1]), float(row[2])
        lam = 1.0 / dist if dist > 0.0 else np.inf
        sizes = {}
        for child in (left, right):
            sizes[child] = 1 if child < n else int(linkage[child - n][3])
        lc, rc = sizes[left], sizes[right]
        cluster = relabel[node]
        if lc >= min_cluster_size and rc >= min_cluster_size:
            for child in (left, right):
                relabel[child] = next_label
                rows.append((cluster, next_label, lam, sizes[child]))
                next_label += 1
            queue.extend((left, right))
        elif lc < min_cluster_size and rc < min_cluster_size:
            for child in (left, right):
                for leaf in bfs_leaves(child):
                    rows.append((cluster, leaf, lam, 1))
                    ignore.add(leaf)
                ignore.update(x for x in _bfs_nodes(linkage, child, n))
        else:
            keep, shed = (left, right) if lc >= min_cluster_size else (right, left)
            relabel[keep] = cluster
            for leaf in bfs_leaves(shed):
                rows.append((cluster, leaf, lam, 1))
                ignore.add(leaf)
            ignore.update(x for x in _bfs_nodes(linkage, shed, n))
            queue.append(keep)
    return CondensedTree(rows=rows, n_points=n, root=n)


def _bfs_nodes(linkage: np.ndarray, node: int, n: int) -> list[int]:
    out, stack = [], [node]
    while stack:
        cur = stack.pop()
        out.append(cur)
        if cur >= n:
            row = linkage[cur - n]
            stack.extend((int(row[0]), int(row[1])))
    return out


def compute_stability(tree: CondensedTree) -> dict[int, float]:
    births: dict[int, float] = {tree.root: 0.0}
    for parent, child, lam, _ in tree.rows:
        if child >= tree.n_points:
            births[child] = lam
    stability: dict[int, float] = defaultdict(float)
    for parent, child, lam, child_size in tree.rows:
        birth = births[parent]
        lam_finite = lam if np.isfinite(lam) else 0.0 if not np.isfinite(birth) else lam
        contrib = (lam - birth) * child_size
        if not np.isfinite(contrib):
            contrib = 0.0 if lam == birth else np.inf
        stability[parent] += contrib
    for cid in births:
        stability.setdefault(cid, 0.0)
    return dict(stability)


def select_clusters_eom(tree: CondensedTree) -> set[int]:
    """Excess-of-mass selection; the root is never selected."""
    stability = compute_stability(tree)
    children = defaultdict(list)
    for parent, child, _, _ in tree.rows:
        if child >= tree.n_points:
            children[parent].append(child)
    clusters = sorted(stability.keys(), reverse=True)  # leaves before ancestors
    selected: dict[int, bool] = {}
    subtree_stability: dict[int, float] = {}
    for cid in clusters:
        kids = children.get(cid, [])
        child_sum = sum(subtree_stability[k] for k in kids)
        if cid == tree.root:
            selected[cid] = False
            subtree_stability[cid] = child_sum
        elif not kids or stability[cid] >= child_sum:
            selected[cid] = True
            subtree_stability[cid] = stability[cid]
        else:
            selected[cid] = False
            subtree_stability[cid] = child_sum
    # drop descendants of selected clusters
    result = set()
    stack = [tree.root]
    while stack:
        cid = stack.pop()
        if selected.get(cid, False):
            result.add(cid)
        else:
            stack.extend(children.get(cid, []))
    return result


def labels_from_selection(tree: CondensedTree, selected: set[int]) -> np.ndarray:
    parent_of: dict[int, int] = {}
    for parent, child, _, _ in tree.rows:
        parent_of[child] = parent
    labels = np.full(tree.n_points, OUTLIER, dtype=np.int64)
    label_map = {cid: i for i, cid in enumerate(sorted(selected))}
    for point in range(tree.n_points):
        node = point
        while node in parent_of:
            node = parent_of[node]
            if node in selected:
                labels[point] = label_map[node]
                break
    return labels


def fit_density_clusters(
    pts, min_cluster_size: int, min_samples: int, extra_params: dict | None = None
) -> ClusterModel:
    """Run the full HDBSCAN procedure over reduced embeddings."""
    if hasattr(pts[0], "values"):
        X = np.stack([p.values for p in pts])
        ids = [p.activity_id for p in pts]
    else:
        X = np.asarray(pts, dtype=np.float64)
        ids = [str(i) for i in range(len(X))]
    n = X.shape[0]
    if n <= min_cluster_size:
        raise ValueError("need more points than min_cluster_size")
    params = {"min_cluster_size": min_cluster_size, "min_samples": min_samples}
    if extra_params:
        params.update(extra_params)

    dist = pairwise_distances(X)
    if np.all(dist == 0.0):
        # degenerate all-identical input: one cluster, no validity
        return ClusterModel(params=params, labels=np.zeros(n, dtype=np.int64), activity_ids=ids)
    core = core_distances(dist, min_samples)
    mreach = mutual_reachability(dist, core)
    mst = minimum_spanning_tree(mreach)
    linkage = single_linkage(mst, n)
    tree = condense_tree(linkage, min_cluster_size)
    selected = select_clusters_eom(tree)
    labels = labels_from_selection(tree, selected)
    return ClusterModel(params=params, labels=labels, activity_ids=ids)
