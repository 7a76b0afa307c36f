"""Pearson correlations for the research questions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int


def pearson(x, y) -> CorrelationResult:
    """Pearson r with a two-sided p-value from the t distribution (df = n-2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    n = len(x)
    if n < 3:
        raise ValueError(f"need at least 3 observations, got {n}")
    if x.std() == 0.0 or y.std() == 0.0:
        raise ValueError("constant input: correlation undefined")
    r = float(np.corrcoef(x, y)[0, 1])
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * np.sqrt((n - 2) / (1.0 - r * r))
        p = float(2.0 * stats.t.sf(abs(t), df=n - 2))
    return CorrelationResult(r=r, p_value=p, n=n)


def topic_activity_correlation(
    rule_counts: dict[int, int], activity_counts: dict[int, int]
) -> CorrelationResult:
    """RQ1: per-topic rule count vs. per-topic activity volume."""
    topics = sorted(set(rule_counts) & set(activity_counts))
    return pearson(
        [rule_counts[t] for t in topics], [activity_counts[t] for t in topics]
    )


def topic_internalization_correlation(
    rule_counts: dict[int, int], mean_internalization: dict[int, float]
) -> CorrelationResult:
    """RQ2: per-topic rule count vs. mean internalization score."""
    topics = sorted(set(rule_counts) & set(mean_internalization))
    return pearson(
        [rule_counts[t] for t in topics], [mean_internalization[t] for t in topics]
    )
