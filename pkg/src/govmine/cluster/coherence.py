"""Sliding-window NPMI topic coherence (C_v style).

Word probabilities are estimated from boolean occurrence in sliding
windows over the corpus (window length 110 tokens by default).  Each
top word's NPMI context vector is compared, via cosine, against the
aggregate vector of its topic's full top-word set (one-set
segmentation); segment scores average into the final value, clamped to
[0, 1].
"""

from __future__ import annotations

import numpy as np

from ..providers.embedding import tokenize
from .topics import TopicModel

DEFAULT_WINDOW = 110


def sliding_windows(docs: list[str], window: int) -> list[set[str]]:
    out: list[set[str]] = []
    for doc in docs:
        toks = tokenize(doc)
        if not toks:
            continue
        if len(toks) <= window:
            out.append(set(toks))
            continue
        for i in range(len(toks) - window + 1):
            out.append(set(toks[i : i + window]))
    return out


def npmi_matrix(words: list[str], windows: list[set[str]]) -> np.ndarray:
    """Pairwise NPMI over boolean window occurrence.

    Conventions: NPMI is 1 for a pair that always co-occurs whenever
    either word appears, -1 for words that never co-occur, and 0 when
    either marginal is zero.
    """
    n_win = len(windows)
    k = len(words)
    occ = np.zeros((k, n_win), dtype=bool)
    for i, w in enumerate(words):
        for j, win in enumerate(windows):
            occ[i, j] = w in win
    p = occ.sum(axis=1) / n_win
    joint = (occ[:, None, :] & occ[None, :, :]).sum(axis=2) / n_win
    npmi = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            pij, pi, pj = joint[i, j], p[i], p[j]
            if pi == 0.0 or pj == 0.0:
                npmi[i, j] = 0.0
            elif pij == 0.0:
                npmi[i, j] = -1.0
            elif pij == pi == pj:
                npmi[i, j] = 1.0  # limit of pmi / -log(pij)
            elif pij == 1.0:
                npmi[i, j] = 0.0
            else:
                npmi[i, j] = np.log(pij / (pi * pj)) / (-np.log(pij))
    return npmi


def topic_cv(words: list[str], windows: list[set[str]]) -> float:
    """One-set segmentation: cosine of each word's NPMI vector against the sum."""
    npmi = npmi_matrix(words, windows)
    total = npmi.sum(axis=0)
    sims = []
    for i in range(len(words)):
        v = npmi[i]
        denom = np.linalg.norm(v) * np.linalg.norm(total)
        sims.append(0.0 if denom == 0.0 else float(np.dot(v, total) / denom))
    return float(np.mean(sims))


def compute_coherence(
    tm: TopicModel,
    docs: list[str],
    top_n: int = 10,
    window: int = DEFAULT_WINDOW,
) -> float:
    """Mean C_v over topics, clamped to [0, 1]."""
    windows = sliding_windows(docs, window)
    if not windows:
        raise ValueError("corpus too small: no usable windows")
    scores = []
    for topic in tm.topics:
        words = [w for w, _ in topic.top_words[:top_n]]
        if len(words) < top_n:
            raise ValueError(
                f"topic {topic.topic_id} has {len(words)} top words, needs {top_n}"
            )
        scores.append(topic_cv(words, windows))
    value = float(np.mean(scores))
    return min(1.0, max(0.0, value))
