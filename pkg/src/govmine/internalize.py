"""Policy-internalization scoring.

Every topic-assigned activity is compared against all rules of its
topic; the internalization score is the maximum pair score, with ties
broken toward the lowest rule id.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cluster.topics import NO_TOPIC, Topic, TopicModel
from .extract.activities import ActivityUnit
from .providers.pairscore import PairProvider


@dataclass(frozen=True)
class ScoredActivity:
    activity_id: str
    topic_id: int
    internalization: float
    closest_rule_id: str

    def __post_init__(self):
        if not 0.0 <= self.internalization <= 1.0:
            raise ValueError("internalization outside [0,1]")


def score_internalization(
    activity: ActivityUnit,
    topic: Topic,
    provider: PairProvider,
    rule_texts: dict[str, str],
) -> ScoredActivity:
    if not topic.seed_rules:
        raise ValueError(f"topic {topic.topic_id} has no rules")
    rule_ids = sorted(topic.seed_rules)
    scores = provider.score_batch([(activity.text, rule_texts[r]) for r in rule_ids])
    best_idx = max(range(len(rule_ids)), key=lambda i: (scores[i], -i))
    return ScoredActivity(
        activity_id=activity.activity_id,
        topic_id=topic.topic_id,
        internalization=scores[best_idx],
        closest_rule_id=rule_ids[best_idx],
    )


def score_corpus(
    activities: list[ActivityUnit],
    tm: TopicModel,
    provider: PairProvider,
    rule_texts: dict[str, str],
) -> tuple[list[ScoredActivity], int]:
    """Score every topic-assigned activity; returns (scores, skipped count)."""
    topics = {t.topic_id: t for t in tm.topics}
    out: list[ScoredActivity] = []
    skipped = 0
    for activity in activities:
        tid = tm.assignments.get(activity.activity_id, NO_TOPIC)
        if tid == NO_TOPIC:
            skipped += 1
            continue
        out.append(score_internalization(activity, topics[tid], provider, rule_texts))
    return out, skipped
