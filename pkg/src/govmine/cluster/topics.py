"""Seeded topic derivation and class-based TF-IDF labeling.

Policy rules act as seeds: each rule lands on its nearest cluster
centroid when similar enough, clusters tied together by rules from the
same policy document merge into one shared governance topic, and
clusters that attract no rule stay unlabeled (counted, but not topics).
Topic labels come from class-based TF-IDF with a seed-word IDF boost.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..extract.activities import PolicyRule
from ..providers.embedding import EmbeddingVector, tokenize
from ..providers.pairscore import cosine_to_unit
from .hdbscan_ import ClusterModel

NO_TOPIC = -1

DEFAULT_SEED_THRESHOLD_FALLBACK = 0.55
DEFAULT_SEED_THRESHOLD_REMOTE = 0.6
DEFAULT_SEED_IDF_BOOST = 1.5


@dataclass
class Topic:
    topic_id: int
    label: str
    seed_rules: list[str]
    member_clusters: list[int]
    top_words: list[tuple[str, float]] = field(default_factory=list)

    @property
    def rule_count(self) -> int:
        return len(self.seed_rules)


@dataclass
class TopicModel:
    topics: list[Topic]
    outlier_rules: list[str]
    assignments: dict[str, int]        # activity_id -> topic_id or NO_TOPIC
    n_clusters: int = 0
    coherence: float | None = None

    def topic_by_id(self, topic_id: int) -> Topic:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise KeyError(topic_id)


def topic_model_to_dict(tm: TopicModel) -> dict:
    return {
        "topics": [
            {
                "topic_id": t.topic_id,
                "label": t.label,
                "seed_rules": t.seed_rules,
                "member_clusters": t.member_clusters,
                "top_words": [[w, s] for w, s in t.top_words],
            }
            for t in tm.topics
        ],
        "outlier_rules": tm.outlier_rules,
        "assignments": tm.assignments,
        "n_clusters": tm.n_clusters,
        "coherence": tm.coherence,
    }


def topic_model_from_dict(data: dict) -> TopicModel:
    return TopicModel(
        topics=[
            Topic(
                topic_id=t["topic_id"],
                label=t["label"],
                seed_rules=list(t["seed_rules"]),
                member_clusters=list(t["member_clusters"]),
                top_words=[(w, float(s)) for w, s in t["top_words"]],
            )
            for t in data["topics"]
        ],
        outlier_rules=list(data["outlier_rules"]),
        assignments={k: int(v) for k, v in data["assignments"].items()},
        n_clusters=int(data["n_clusters"]),
        coherence=data.get("coherence"),
    )


def _centroids(model: ClusterModel, activity_vecs: dict[str, EmbeddingVector]):
    sums: dict[int, np.ndarray] = {}
    counts: dict[int, int] = defaultdict(int)
    for aid, label in zip(model.activity_ids, model.labels):
        if label < 0:
            continue
        v = activity_vecs[aid].values
        if label not in sums:
            sums[int(label)] = np.zeros_like(v)
        sums[int(label)] += v
        counts[int(label)] += 1
    return {c: sums[c] / counts[c] for c in sums}


def derive_topics(
    model: ClusterModel,
    rules: list[PolicyRule],
    rule_vecs: dict[str, EmbeddingVector],
    activity_vecs: dict[str, EmbeddingVector],
    threshold: float = DEFAULT_SEED_THRESHOLD_FALLBACK,
) -> TopicModel:
    """Assign rules to clusters, merge rule-sharing clusters into topics."""
    centroids = _centroids(model, activity_vecs)
    cluster_ids = sorted(centroids)
    active_rules = [r for r in rules if not r.excluded]
    rule_cluster: dict[str, int] = {}
    outliers: list[str] = []
    for rule in active_rules:
        rv = rule_vecs[rule.rule_id].values
        rnorm = float(np.linalg.norm(rv))
        best_c, best_sim = None, -1.0
        for c in cluster_ids:
            cv = centroids[c]
            denom = rnorm * float(np.linalg.norm(cv))
            cos = 0.0 if denom == 0 else float(np.dot(rv, cv)) / denom
            sim = cosine_to_unit(cos)
            if sim > best_sim:
                best_c, best_sim = c, sim
        if best_c is not None and best_sim >= threshold:
            rule_cluster[rule.rule_id] = best_c
        else:
            outliers.append(rule.rule_id)

    # merge clusters linked by rules from the same policy document
    doc_clusters: dict[str, set[int]] = defaultdict(set)
    rules_by_id = {r.rule_id: r for r in active_rules}
    for rid, c in rule_cluster.items():
        doc_clusters[rules_by_id[rid].doc_id].add(c)
    parent: dict[int, int] = {c: c for c in rule_cluster.values()}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for clusters in doc_clusters.values():
        clusters = sorted(clusters)
        for other in clusters[1:]:
            ra, rb = find(clusters[0]), find(other)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = defaultdict(list)
    for c in sorted(parent):
        groups[find(c)].append(c)

    topics: list[Topic] = []
    cluster_topic: dict[int, int] = {}
    for tid, root in enumerate(sorted(groups)):
        members = sorted(groups[root])
        seed = sorted(rid for rid, c in rule_cluster.items() if c in members)
        topics.append(Topic(topic_id=tid, label=f"topic-{tid}",
                            seed_rules=seed, member_clusters=members))
        for c in members:
            cluster_topic[c] = tid

    assignments = {
        aid: cluster_topic.get(int(label), NO_TOPIC)
        for aid, label in zip(model.activity_ids, model.labels)
    }
    return TopicModel(
        topics=topics,
        outlier_rules=sorted(outliers),
        assignments=assignments,
        n_clusters=len(cluster_ids),
    )


def class_tfidf(
    topic_docs: dict[int, list[str]],
    seed_words: dict[int, set[str]],
    boost: float = DEFAULT_SEED_IDF_BOOST,
    top_n: int = 10,
) -> dict[int, list[tuple[str, float]]]:
    """Class-based TF-IDF: each topic's concatenated texts form one document.

    IDF of a word appearing in a topic's seed rules is multiplied by
    ``boost`` for that topic.
    """
    tf: dict[int, Counter] = {
        t: Counter(w for text in docs for w in tokenize(text))
        for t, docs in topic_docs.items()
    }
    total_freq = Counter()
    for counts in tf.values():
        total_freq.update(counts)
    avg_class_tokens = sum(sum(c.values()) for c in tf.values()) / max(len(tf), 1)
    out: dict[int, list[tuple[str, float]]] = {}
    for t, counts in tf.items():
        seeds = seed_words.get(t, set())
        scored = []
        for w, c in counts.items():
            idf = math.log(1.0 + avg_class_tokens / total_freq[w])
            if w in seeds:
                idf *= boost
            scored.append((w, c * idf))
        scored.sort(key=lambda x: (-x[1], x[0]))
        out[t] = scored[:top_n]
    return out


def label_topics(
    tm: TopicModel,
    activity_texts: dict[str, str],
    rule_texts: dict[str, str],
    boost: float = DEFAULT_SEED_IDF_BOOST,
    top_n: int = 10,
) -> TopicModel:
    """Attach top words per topic via seeded class-based TF-IDF."""
    topic_docs: dict[int, list[str]] = defaultdict(list)
    for aid, tid in tm.assignments.items():
        if tid != NO_TOPIC:
            topic_docs[tid].append(activity_texts[aid])
    seed_words = {
        t.topic_id: {w for rid in t.seed_rules for w in tokenize(rule_texts[rid])}
        for t in tm.topics
    }
    for t in tm.topics:
        if not topic_docs.get(t.topic_id):
            raise ValueError(f"topic {t.topic_id} has no member activities")
    top = class_tfidf(dict(topic_docs), seed_words, boost=boost, top_n=top_n)
    for t in tm.topics:
        t.top_words = top[t.topic_id]
    return tm
