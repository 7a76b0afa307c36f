"""Pipeline stages: file-to-file transformations driven by one config.

Stages communicate only through artifacts in the run directory, so any
stage can be rerun (or reimplemented) in isolation.  Every stage
appends a manifest entry with input/output digests and counts.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..cluster.select import ParameterGrid, select_model
from ..cluster.coherence import compute_coherence
from ..cluster.topics import (
    DEFAULT_SEED_THRESHOLD_FALLBACK,
    DEFAULT_SEED_THRESHOLD_REMOTE,
    TopicModel,
    derive_topics,
    label_topics,
    topic_model_from_dict,
    topic_model_to_dict,
)
from ..config import (
    Config,
    POLICY_MODE_REDUCED,
    PROVIDERS_REMOTE,
)
from ..extract.activities import ActivityUnit, PolicyRule, extract_activities, parse_policy_rules
from ..ingest.filtering import (
    DEFAULT_BOT_SENDERS,
    DEFAULT_REPORT_TEMPLATES,
    FilterConfig,
    filter_messages,
)
from ..ingest.language import HeuristicLangId, classify_language
from ..ingest.mailbox import (
    apply_section_exclusions,
    ingest_mailbox,
    read_policy_documents,
)
from ..ingest.sentences import segment_sentences
from ..ingest.types import IngestStats, PolicyDocument, SentenceRecord, SourceRef
from ..internalize import ScoredActivity, score_corpus
from ..providers.embedding import EmbeddingVector, HashEmbedder
from ..providers.pairscore import FallbackPairScorer
from ..extract.srl import FallbackSRL
from .manifest import (
    PreconditionError,
    RunManifest,
    atomic_write_bytes,
    atomic_write_text,
    run_lock,
)

STAGES = ["ingest", "extract", "embed", "cluster", "score", "analyze", "report"]

_DEPS = {
    "ingest": [],
    "extract": ["ingest"],
    "embed": ["extract"],
    "cluster": ["embed"],
    "score": ["cluster"],
    "analyze": ["score"],
    "report": ["analyze"],
}


@dataclass
class ProviderBundle:
    name: str
    srl: object
    embedder: object
    pair: object
    langid: object


def build_providers(cfg: Config) -> ProviderBundle:
    if cfg.providers.mode == PROVIDERS_REMOTE:
        from ..providers.remote import (
            ModelServerClient,
            RemoteEmbedder,
            RemoteLangId,
            RemotePairScorer,
            RemoteSRL,
        )

        client = ModelServerClient(cfg.providers.remote_url)
        return ProviderBundle(
            name=f"remote:{cfg.providers.remote_url}",
            srl=RemoteSRL(client),
            embedder=RemoteEmbedder(client),
            pair=RemotePairScorer(client),
            langid=RemoteLangId(client),
        )
    embedder = HashEmbedder(dim=cfg.providers.embed_dim, seed=cfg.providers.seed)
    return ProviderBundle(
        name="fallback",
        srl=FallbackSRL(),
        embedder=embedder,
        pair=FallbackPairScorer(embedder),
        langid=HeuristicLangId(),
    )


def _seed_threshold(cfg: Config) -> float:
    if cfg.cluster.seed_threshold is not None:
        return cfg.cluster.seed_threshold
    if cfg.providers.mode == PROVIDERS_REMOTE:
        return DEFAULT_SEED_THRESHOLD_REMOTE
    return DEFAULT_SEED_THRESHOLD_FALLBACK


# ------------------------------------------------------------- serialization

def _sentence_to_row(rec: SentenceRecord) -> dict:
    r = rec.source_ref
    return {
        "origin_id": r.origin_id,
        "message_id": r.message_id,
        "sentence_index": r.sentence_index,
        "char_start": r.char_start,
        "char_end": r.char_end,
        "text": rec.text,
        "language": rec.language,
        "kept": rec.kept,
    }


def _sentence_from_row(row: dict) -> SentenceRecord:
    return SentenceRecord(
        source_ref=SourceRef(
            origin_id=row["origin_id"],
            message_id=row["message_id"],
            sentence_index=row["sentence_index"],
            char_start=row["char_start"],
            char_end=row["char_end"],
        ),
        text=row["text"],
        language=row["language"],
        kept=row["kept"],
    )


def _activity_to_row(a: ActivityUnit) -> dict:
    r = a.source_ref
    return {
        "activity_id": a.activity_id,
        "text": a.text,
        "verb": a.verb,
        "frame_index": a.frame_index,
        "origin_id": r.origin_id,
        "message_id": r.message_id,
        "sentence_index": r.sentence_index,
        "char_start": r.char_start,
        "char_end": r.char_end,
    }


def _activity_from_row(row: dict) -> ActivityUnit:
    return ActivityUnit(
        activity_id=row["activity_id"],
        text=row["text"],
        verb=row["verb"],
        frame_index=row["frame_index"],
        source_ref=SourceRef(
            origin_id=row["origin_id"],
            message_id=row["message_id"],
            sentence_index=row["sentence_index"],
            char_start=row["char_start"],
            char_end=row["char_end"],
        ),
    )


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    atomic_write_text(path, text)


def _read_jsonl(path: Path) -> list[dict]:
    out = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


# ------------------------------------------------------------------- stages

def stage_ingest(cfg: Config, run_dir: Path, manifest: RunManifest, prov: ProviderBundle) -> dict:
    if not cfg.paths.mailboxes:
        raise PreconditionError("no mailboxes configured under [paths]")
    fc = FilterConfig(
        bot_senders=cfg.filters.bot_senders or list(DEFAULT_BOT_SENDERS),
        report_templates=cfg.filters.report_templates or list(DEFAULT_REPORT_TEMPLATES),
    )
    stats = IngestStats()
    sentence_rows: list[dict] = []
    emails_in = emails_kept = kept_sentences = 0
    for project_id in sorted(cfg.paths.mailboxes):
        msgs = ingest_mailbox(cfg.paths.mailboxes[project_id], project_id, stats)
        emails_in += len(msgs)
        kept = filter_messages(msgs, fc)
        emails_kept += len(kept)
        for msg in kept:
            for rec in segment_sentences(msg):
                classify_language(rec, prov.langid)
                kept_sentences += rec.kept
                sentence_rows.append(_sentence_to_row(rec))

    docs = read_policy_documents(cfg.paths.policies)
    if cfg.policy.mode == POLICY_MODE_REDUCED:
        docs = apply_section_exclusions(docs, cfg.policy.excluded_sections)
    doc_rows = [
        {
            "doc_id": d.doc_id,
            "source": d.source,
            "section_path": list(d.section_path),
            "text": d.text,
            "excluded": d.excluded,
        }
        for d in docs
    ]

    sentences_path = run_dir / "sentences.jsonl"
    docs_path = run_dir / "policy_docs.jsonl"
    stats_path = run_dir / "ingest_stats.json"
    _write_jsonl(sentences_path, sentence_rows)
    _write_jsonl(docs_path, doc_rows)
    atomic_write_text(
        stats_path,
        json.dumps(
            {"parsed": stats.parsed, "skipped": stats.skipped, "reasons": stats.reasons},
            indent=2, sort_keys=True,
        ) + "\n",
    )
    counts = {
        "emails_in": emails_in,
        "emails_kept": emails_kept,
        "sentences": len(sentence_rows),
        "sentences_kept": kept_sentences,
        "policy_docs": len(docs),
        "policy_docs_excluded": sum(d.excluded for d in docs),
    }
    manifest.record(
        "ingest",
        inputs=[cfg.paths.mailboxes[p] for p in sorted(cfg.paths.mailboxes)] + [cfg.paths.policies],
        outputs=[sentences_path, docs_path, stats_path],
        counts=counts,
        provider=prov.name,
    )
    return counts


def stage_extract(cfg: Config, run_dir: Path, manifest: RunManifest, prov: ProviderBundle) -> dict:
    manifest.require("ingest", "extract")
    sentences = [_sentence_from_row(r) for r in _read_jsonl(run_dir / "sentences.jsonl")]
    activity_rows: list[dict] = []
    for rec in sentences:
        if not rec.kept:
            continue
        for unit in extract_activities(rec, prov.srl):
            activity_rows.append(_activity_to_row(unit))

    docs = [
        PolicyDocument(
            doc_id=r["doc_id"],
            source=r["source"],
            section_path=tuple(r["section_path"]),
            text=r["text"],
            excluded=r["excluded"],
        )
        for r in _read_jsonl(run_dir / "policy_docs.jsonl")
    ]
    rules = parse_policy_rules(docs, prov.srl)
    rule_rows = [
        {"rule_id": r.rule_id, "text": r.text, "doc_id": r.doc_id, "excluded": r.excluded}
        for r in rules
    ]
    activities_path = run_dir / "activities.jsonl"
    rules_path = run_dir / "rules.jsonl"
    _write_jsonl(activities_path, activity_rows)
    _write_jsonl(rules_path, rule_rows)
    counts = {
        "sentences": sum(1 for s in sentences if s.kept),
        "activities": len(activity_rows),
        "rules": len(rule_rows),
        "rules_excluded": sum(r.excluded for r in rules),
    }
    manifest.record(
        "extract",
        inputs=[run_dir / "sentences.jsonl", run_dir / "policy_docs.jsonl"],
        outputs=[activities_path, rules_path],
        counts=counts,
        provider=prov.name,
    )
    return counts


def stage_embed(cfg: Config, run_dir: Path, manifest: RunManifest, prov: ProviderBundle) -> dict:
    manifest.require("extract", "embed")
    activities = _read_jsonl(run_dir / "activities.jsonl")
    rules = _read_jsonl(run_dir / "rules.jsonl")
    if not activities:
        raise PreconditionError("no activities to embed: extract produced none")
    act_vecs = prov.embedder.embed_batch([a["text"] for a in activities])
    rule_vecs = prov.embedder.embed_batch([r["text"] for r in rules]) if rules else []
    act_path = run_dir / "activity_vecs.npy"
    rule_path = run_dir / "rule_vecs.npy"
    ids_path = run_dir / "embed_ids.json"
    dim = act_vecs[0].dim

    def _save(path: Path, vecs) -> None:
        buf = io.BytesIO()
        arr = np.stack([v.values for v in vecs]) if vecs else np.zeros((0, dim))
        np.save(buf, arr.astype(np.float64))
        atomic_write_bytes(path, buf.getvalue())

    _save(act_path, act_vecs)
    _save(rule_path, rule_vecs)
    atomic_write_text(
        ids_path,
        json.dumps(
            {
                "activities": [a["activity_id"] for a in activities],
                "rules": [r["rule_id"] for r in rules],
                "dim": dim,
            },
            indent=2, sort_keys=True,
        ) + "\n",
    )
    counts = {"activities": len(act_vecs), "rules": len(rule_vecs), "dim": dim}
    manifest.record(
        "embed",
        inputs=[run_dir / "activities.jsonl", run_dir / "rules.jsonl"],
        outputs=[act_path, rule_path, ids_path],
        counts=counts,
        provider=prov.name,
        seeds={"embed_seed": cfg.providers.seed},
    )
    return counts


def _load_embeddings(run_dir: Path):
    ids = json.loads((run_dir / "embed_ids.json").read_text(encoding="utf-8"))
    act = np.load(run_dir / "activity_vecs.npy")
    rule = np.load(run_dir / "rule_vecs.npy")
    return ids, act, rule


def stage_cluster(cfg: Config, run_dir: Path, manifest: RunManifest, prov: ProviderBundle) -> dict:
    manifest.require("embed", "cluster")
    ids, act_arr, rule_arr = _load_embeddings(run_dir)
    act_vecs = [EmbeddingVector(v) for v in act_arr]
    grid = ParameterGrid(
        min_cluster_size=cfg.cluster.min_cluster_size,
        min_samples=cfg.cluster.min_samples,
        n_neighbors=cfg.cluster.n_neighbors,
    )
    model = select_model(
        act_vecs,
        grid,
        reduce_dim=cfg.cluster.reduce_dim,
        activity_ids=ids["activities"],
        seed=cfg.cluster.seed,
    )

    rule_rows = _read_jsonl(run_dir / "rules.jsonl")
    rules = [
        PolicyRule(rule_id=r["rule_id"], text=r["text"], doc_id=r["doc_id"], excluded=r["excluded"])
        for r in rule_rows
    ]
    rule_vec_map = {rid: EmbeddingVector(v) for rid, v in zip(ids["rules"], rule_arr)}
    act_vec_map = {aid: v for aid, v in zip(ids["activities"], act_vecs)}
    tm = derive_topics(model, rules, rule_vec_map, act_vec_map, threshold=_seed_threshold(cfg))

    activities = _read_jsonl(run_dir / "activities.jsonl")
    activity_texts = {a["activity_id"]: a["text"] for a in activities}
    rule_texts = {r["rule_id"]: r["text"] for r in rule_rows}
    if tm.topics:
        label_topics(tm, activity_texts, rule_texts, top_n=cfg.cluster.top_n_words)
        try:
            tm.coherence = compute_coherence(
                tm, list(activity_texts.values()),
                top_n=cfg.cluster.top_n_words, window=cfg.cluster.coherence_window,
            )
        except ValueError:
            tm.coherence = None

    cluster_path = run_dir / "cluster.json"
    topics_path = run_dir / "topics.json"
    atomic_write_text(
        cluster_path,
        json.dumps(
            {
                "params": model.params,
                "validity": model.validity,
                "labels": {aid: int(l) for aid, l in zip(model.activity_ids, model.labels)},
            },
            indent=2, sort_keys=True,
        ) + "\n",
    )
    atomic_write_text(
        topics_path, json.dumps(topic_model_to_dict(tm), indent=2, sort_keys=True) + "\n"
    )
    counts = {
        "clusters": tm.n_clusters,
        "topics": len(tm.topics),
        "outlier_rules": len(tm.outlier_rules),
        "noise_points": int((model.labels < 0).sum()),
        "coherence": tm.coherence,
        "dbcv": model.validity,
    }
    manifest.record(
        "cluster",
        inputs=[run_dir / "activity_vecs.npy", run_dir / "rule_vecs.npy", run_dir / "rules.jsonl"],
        outputs=[cluster_path, topics_path],
        counts=counts,
        provider=prov.name,
        seeds={"reduce_seed": cfg.cluster.seed},
    )
    return counts


def stage_score(cfg: Config, run_dir: Path, manifest: RunManifest, prov: ProviderBundle) -> dict:
    manifest.require("cluster", "score")
    tm = topic_model_from_dict(json.loads((run_dir / "topics.json").read_text(encoding="utf-8")))
    activities = [_activity_from_row(r) for r in _read_jsonl(run_dir / "activities.jsonl")]
    rule_texts = {r["rule_id"]: r["text"] for r in _read_jsonl(run_dir / "rules.jsonl")}
    scores, skipped = score_corpus(activities, tm, prov.pair, rule_texts)
    scores_path = run_dir / "scores.jsonl"
    _write_jsonl(
        scores_path,
        [
            {
                "activity_id": s.activity_id,
                "topic_id": s.topic_id,
                "internalization": s.internalization,
                "closest_rule_id": s.closest_rule_id,
            }
            for s in scores
        ],
    )
    counts = {"scored": len(scores), "skipped": skipped}
    manifest.record(
        "score",
        inputs=[run_dir / "topics.json", run_dir / "activities.jsonl", run_dir / "rules.jsonl"],
        outputs=[scores_path],
        counts=counts,
        provider=prov.name,
    )
    return counts


def _load_scores(run_dir: Path) -> list[ScoredActivity]:
    return [
        ScoredActivity(
            activity_id=r["activity_id"],
            topic_id=r["topic_id"],
            internalization=r["internalization"],
            closest_rule_id=r["closest_rule_id"],
        )
        for r in _read_jsonl(run_dir / "scores.jsonl")
    ]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if np.isnan(x):
            return ""
        return repr(float(x))
    return str(x)


def stage_analyze(cfg: Config, run_dir: Path, manifest: RunManifest, prov: ProviderBundle) -> dict:
    from ..analytics.correlation import (
        topic_activity_correlation,
        topic_internalization_correlation,
    )
    from ..analytics.design import impute_missing, prune_collinear, transform_standardize
    from ..analytics.diagnostics import run_diagnostics
    from ..analytics.glm import SeparationError, fit_nested_models
    from ..analytics.lasso import select_predictors
    from ..analytics.table import (
        build_project_table,
        per_topic_summary,
        predictor_groups,
        read_covariates,
        to_design_matrix,
    )

    manifest.require("score", "analyze")
    tm = topic_model_from_dict(json.loads((run_dir / "topics.json").read_text(encoding="utf-8")))
    activities = [_activity_from_row(r) for r in _read_jsonl(run_dir / "activities.jsonl")]
    scores = _load_scores(run_dir)
    covariates = read_covariates(cfg.paths.covariates)
    records, excluded_projects = build_project_table(scores, tm, covariates, activities)

    rule_counts, act_counts, mean_int = per_topic_summary(tm, scores)
    topic_rows = [
        [t, rule_counts[t], act_counts[t], _fmt(mean_int[t])]
        for t in sorted(rule_counts)
    ]
    rq1_path = run_dir / "rq1.csv"
    rq2_path = run_dir / "rq2.csv"
    header = ["topic", "rule_count", "activity_count", "mean_internalization"]
    _write_csv(rq1_path, header, topic_rows)
    _write_csv(rq2_path, header, topic_rows)

    diagnostics: dict = {
        "excluded_projects": excluded_projects,
        "n_projects": len(records),
        "metrics_note": "F1/accuracy are in-sample at threshold 0.5",
    }
    try:
        corr1 = topic_activity_correlation(rule_counts, act_counts)
        diagnostics["rq1"] = {"r": corr1.r, "p": corr1.p_value, "n": corr1.n}
    except ValueError as exc:
        diagnostics["rq1"] = {"error": str(exc)}
    try:
        usable = {t: m for t, m in mean_int.items() if not np.isnan(m)}
        corr2 = topic_internalization_correlation(rule_counts, usable)
        diagnostics["rq2"] = {"r": corr2.r, "p": corr2.p_value, "n": corr2.n}
    except ValueError as exc:
        diagnostics["rq2"] = {"error": str(exc)}

    rq3_rows: list[list] = []
    rq3_header = ["model", "term", "coefficient", "std_error", "p_value"]
    try:
        dm, y = to_design_matrix(records)
        if len({int(v) for v in y}) < 2:
            raise ValueError("outcome is constant: logit models undefined")
        dm = impute_missing(dm, cfg.analytics.impute_max_iter, cfg.analytics.impute_tol)
        dm = transform_standardize(dm)
        dm, vif, dropped = prune_collinear(dm, cfg.analytics.vif_threshold)
        diagnostics["vif"] = {k: (None if np.isinf(v) else v) for k, v in vif.items()}
        diagnostics["vif_dropped"] = dropped
        groups = predictor_groups(dm.columns)
        lasso_groups = None
        if cfg.analytics.grouped_lasso:
            per_topic: dict[str, list[str]] = {}
            for c in dm.columns:
                if c.startswith(("act_", "int_")):
                    per_topic.setdefault(c.split("_", 1)[1], []).append(c)
            lasso_groups = {f"topic_{k}": v for k, v in per_topic.items()}
        sel = select_predictors(
            dm.data, y, dm.columns,
            folds=cfg.analytics.cv_folds, groups=lasso_groups,
        )
        diagnostics["lasso"] = {"lambda": sel.lambda_, "selected": sel.selected}
        keep = [c for c in dm.columns if c in sel.selected]
        sub = dm.drop([c for c in dm.columns if c not in keep]) if keep else dm
        sel_groups = {g: [c for c in cols if c in sub.columns] for g, cols in groups.items()}
        fits = fit_nested_models(sub.data, y, sub.columns, sel_groups)
        for mid in sorted(fits):
            fit = fits[mid]
            for row in fit.coef_table():
                rq3_rows.append([mid, row["term"], _fmt(row["coef"]), _fmt(row["se"]), _fmt(row["p"])])
            rq3_rows.append([mid, "AIC", _fmt(fit.aic), "", ""])
            rq3_rows.append([mid, "TjurR2", _fmt(fit.tjur_r2), "", ""])
            rq3_rows.append([mid, "WeightedF1", _fmt(fit.weighted_f1), "", ""])
            rq3_rows.append([mid, "Accuracy", _fmt(fit.accuracy), "", ""])
            rq3_rows.append([mid, "NObs", fit.n_obs, "", ""])
            rq3_rows.append([mid, "status", "ok", "", ""])
        m4 = fits["M4"]
        m4_cols = [c for c in sub.columns if c in sel_groups["covariate"] + sel_groups["activity"] + sel_groups["internalization"]]
        Xd = sub.data[:, [sub.columns.index(c) for c in m4_cols]]
        diag = run_diagnostics(m4, Xd, y, m4_cols)
        diagnostics["cooks_distance"] = [float(v) for v in diag.cooks_distance]
        diagnostics["cooks_threshold"] = diag.cooks_threshold
        diagnostics["influential_rows"] = [sub.row_ids[i] for i in diag.influential]
        diagnostics["box_tidwell"] = diag.box_tidwell
        diagnostics["box_tidwell_skipped"] = diag.box_tidwell_skipped
    except (ValueError, SeparationError, RuntimeError, np.linalg.LinAlgError) as exc:
        diagnostics["rq3_error"] = str(exc)
        rq3_rows.append(["all", "status", f"error: {exc}", "", ""])

    rq3_path = run_dir / "rq3_models.csv"
    diag_path = run_dir / "diagnostics.json"
    _write_csv(rq3_path, rq3_header, rq3_rows)
    atomic_write_text(diag_path, json.dumps(diagnostics, indent=2, sort_keys=True) + "\n")
    counts = {
        "projects": len(records),
        "excluded_projects": len(excluded_projects),
        "topics": len(rule_counts),
    }
    manifest.record(
        "analyze",
        inputs=[run_dir / "scores.jsonl", run_dir / "topics.json", cfg.paths.covariates],
        outputs=[rq1_path, rq2_path, rq3_path, diag_path],
        counts=counts,
        provider=prov.name,
    )
    return counts


def run_stage(
    stage: str, cfg: Config, run_dir: str | Path, baseline_run: str | Path | None = None
) -> dict:
    """Execute one pipeline stage under the run-directory lock."""
    if stage not in STAGES:
        raise PreconditionError(f"unknown stage: {stage}; expected one of {STAGES}")
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    prov = build_providers(cfg)
    with run_lock(run_dir):
        manifest = RunManifest(run_dir, cfg.to_dict())
        if stage == "report":
            from ..report import stage_report

            return stage_report(cfg, run_dir, manifest, prov, baseline_run)
        fn = {
            "ingest": stage_ingest,
            "extract": stage_extract,
            "embed": stage_embed,
            "cluster": stage_cluster,
            "score": stage_score,
            "analyze": stage_analyze,
        }[stage]
        return fn(cfg, run_dir, manifest, prov)


def run_all(cfg: Config, run_dir: str | Path, baseline_run: str | Path | None = None) -> dict:
    counts = {}
    for stage in STAGES:
        counts[stage] = run_stage(stage, cfg, run_dir, baseline_run)
    return counts
