"""Correspondence between two topic models.

Topics are greedily matched on top-N word overlap; rule correspondence
is the Pearson correlation of same-topic co-assignment indicators over
every pair of rules both models assigned.
"""

from __future__ import annotations

import numpy as np

from .topics import TopicModel


def _top_words(model: TopicModel, top_n: int) -> dict[int, set[str]]:
    return {t.topic_id: {w for w, _ in t.top_words[:top_n]} for t in model.topics}


def topic_overlap_pct(a: TopicModel, b: TopicModel, top_n: int) -> float:
    """Mean top-N word overlap over greedily matched topic pairs, in percent."""
    wa, wb = _top_words(a, top_n), _top_words(b, top_n)
    pairs = sorted(
        ((len(wa[i] & wb[j]), i, j) for i in wa for j in wb),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    used_a: set[int] = set()
    used_b: set[int] = set()
    overlaps = []
    for inter, i, j in pairs:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        overlaps.append(inter / top_n)
    # unmatched topics (count mismatch) score zero overlap
    unmatched = max(len(wa), len(wb)) - len(overlaps)
    overlaps.extend([0.0] * unmatched)
    return 100.0 * float(np.mean(overlaps)) if overlaps else 0.0


def _rule_topic(model: TopicModel) -> dict[str, int]:
    return {rid: t.topic_id for t in model.topics for rid in t.seed_rules}


def rule_assignment_correlation(a: TopicModel, b: TopicModel) -> float:
    """Pearson r of pairwise same-topic indicators over shared assigned rules."""
    ra, rb = _rule_topic(a), _rule_topic(b)
    shared = sorted(set(ra) & set(rb))
    if len(shared) < 2:
        raise ValueError("no shared rules: correlation undefined")
    xs, ys = [], []
    for i in range(len(shared)):
        for j in range(i + 1, len(shared)):
            xs.append(1.0 if ra[shared[i]] == ra[shared[j]] else 0.0)
            ys.append(1.0 if rb[shared[i]] == rb[shared[j]] else 0.0)
    x = np.asarray(xs)
    y = np.asarray(ys)
    sx, sy = x.std(), y.std()
    if sx == 0.0 and sy == 0.0:
        return 1.0 if np.allclose(x, y) else 0.0
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def compare_topic_models(
    a: TopicModel, b: TopicModel, top_n: int = 10
) -> tuple[float, float]:
    for m in (a, b):
        if any(not t.top_words for t in m.topics):
            raise ValueError("both models must be labeled before comparison")
    return topic_overlap_pct(a, b, top_n), rule_assignment_correlation(a, b)
