"""Per-project measurement table and its design-matrix view."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..cluster.topics import TopicModel
from ..extract.activities import ActivityUnit
from ..internalize import ScoredActivity
from .design import KIND_LOG_COUNT, KIND_STANDARDIZE, DesignMatrix

COVARIATE_COLUMNS = ["committers", "commits", "loc", "developer_emails", "incubation_months"]

MISSING = math.nan


@dataclass
class ProjectRecord:
    project_id: str
    outcome: int
    covariates: dict[str, float]
    activity_counts: dict[int, int] = field(default_factory=dict)
    mean_internalization: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {self.outcome}")
        for t, c in self.activity_counts.items():
            if c < 0:
                raise ValueError(f"negative activity count for topic {t}")
        for t, m in self.mean_internalization.items():
            if not math.isnan(m) and not 0.0 <= m <= 1.0:
                raise ValueError(f"internalization outside [0,1] for topic {t}")


def read_covariates(path: str | Path) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pid = row["project_id"].strip()
            out[pid] = {
                "outcome": float(row["outcome"]),
                **{c: float(row[c]) for c in COVARIATE_COLUMNS},
            }
    return out


def build_project_table(
    scored: list[ScoredActivity],
    tm: TopicModel,
    covariates: dict[str, dict[str, float]],
    activities: list[ActivityUnit],
) -> tuple[list[ProjectRecord], list[str]]:
    """Aggregate scored activities per project and topic.

    A topic with no activity in a project gets count 0 and MISSING
    internalization.  Projects present in the email corpus but absent
    from the covariates table are excluded and reported.
    """
    project_of = {a.activity_id: a.source_ref.origin_id for a in activities}
    topic_ids = sorted(t.topic_id for t in tm.topics)
    counts: dict[str, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    sums: dict[str, dict[int, float]] = defaultdict(lambda: defaultdict(float))
    seen_projects: set[str] = {project_of[a.activity_id] for a in activities}
    for s in scored:
        pid = project_of[s.activity_id]
        counts[pid][s.topic_id] += 1
        sums[pid][s.topic_id] += s.internalization

    excluded = sorted(p for p in seen_projects if p not in covariates)
    records: list[ProjectRecord] = []
    for pid in sorted(covariates):
        cov = covariates[pid]
        act = {t: counts[pid].get(t, 0) for t in topic_ids}
        intern = {
            t: (sums[pid][t] / act[t]) if act[t] > 0 else MISSING for t in topic_ids
        }
        records.append(
            ProjectRecord(
                project_id=pid,
                outcome=int(cov["outcome"]),
                covariates={c: cov[c] for c in COVARIATE_COLUMNS},
                activity_counts=act,
                mean_internalization=intern,
            )
        )
    return records, excluded


def to_design_matrix(records: list[ProjectRecord]) -> tuple[DesignMatrix, np.ndarray]:
    """Flatten records into (DesignMatrix, outcome vector).

    Columns: the five covariates, then act_<topic> counts, then
    int_<topic> internalization means; 5 + 2*|topics| predictors.
    """
    if not records:
        raise ValueError("no project records")
    topic_ids = sorted(records[0].activity_counts)
    columns = (
        list(COVARIATE_COLUMNS)
        + [f"act_{t}" for t in topic_ids]
        + [f"int_{t}" for t in topic_ids]
    )
    kinds = {c: KIND_LOG_COUNT for c in COVARIATE_COLUMNS if c != "incubation_months"}
    kinds["incubation_months"] = KIND_STANDARDIZE
    for t in topic_ids:
        kinds[f"act_{t}"] = KIND_LOG_COUNT
        kinds[f"int_{t}"] = KIND_STANDARDIZE
    data = np.empty((len(records), len(columns)))
    y = np.empty(len(records))
    for i, rec in enumerate(records):
        y[i] = rec.outcome
        row = [rec.covariates[c] for c in COVARIATE_COLUMNS]
        row += [float(rec.activity_counts[t]) for t in topic_ids]
        row += [rec.mean_internalization[t] for t in topic_ids]
        data[i] = row
    return (
        DesignMatrix(
            columns=columns,
            data=data,
            kinds=kinds,
            row_ids=[r.project_id for r in records],
        ),
        y,
    )


def predictor_groups(columns: list[str]) -> dict[str, list[str]]:
    """Partition design columns into the three nested-model groups."""
    return {
        "covariate": [c for c in columns if c in COVARIATE_COLUMNS],
        "activity": [c for c in columns if c.startswith("act_")],
        "internalization": [c for c in columns if c.startswith("int_")],
    }


def per_topic_summary(
    tm: TopicModel, scored: list[ScoredActivity]
) -> tuple[dict[int, int], dict[int, int], dict[int, float]]:
    """(rule_count, activity_count, mean_internalization) keyed by topic."""
    rule_counts = {t.topic_id: t.rule_count for t in tm.topics}
    act_counts: dict[int, int] = {t.topic_id: 0 for t in tm.topics}
    sums: dict[int, float] = {t.topic_id: 0.0 for t in tm.topics}
    for s in scored:
        act_counts[s.topic_id] += 1
        sums[s.topic_id] += s.internalization
    means = {
        t: (sums[t] / act_counts[t]) if act_counts[t] > 0 else MISSING
        for t in act_counts
    }
    return rule_counts, act_counts, means
