"""Static report bundle: figure data CSVs and a self-contained HTML page."""

from __future__ import annotations

import csv
import html
import io
import json
from pathlib import Path

import numpy as np

from .cluster.compare import compare_topic_models
from .cluster.topics import topic_model_from_dict
from .config import Config
from .pipeline.manifest import PreconditionError, RunManifest, atomic_write_text


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _html_table(title: str, header: list[str], rows: list[list[str]]) -> str:
    head = "".join(f"<th>{html.escape(str(h))}</th>" for h in header)
    body = "".join(
        "<tr>" + "".join(f"<td>{html.escape(str(c))}</td>" for c in row) + "</tr>"
        for row in rows
    )
    return (
        f"<h2>{html.escape(title)}</h2>"
        f"<table><thead><tr>{head}</tr></thead><tbody>{body}</tbody></table>"
    )


def _svg_bars(title: str, labels: list[str], values: list[float]) -> str:
    """Minimal deterministic bar chart."""
    if not values:
        return ""
    width, height, pad = 480, 200, 30
    vmax = max(max(values), 1e-12)
    n = len(values)
    bw = (width - 2 * pad) / n
    bars = []
    for i, (lab, v) in enumerate(zip(labels, values)):
        h = (height - 2 * pad) * v / vmax
        x = pad + i * bw
        y = height - pad - h
        bars.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="{bw * 0.8:.1f}" height="{h:.1f}" fill="#4878a8"/>'
            f'<text x="{x + bw * 0.4:.1f}" y="{height - pad + 12}" font-size="9" '
            f'text-anchor="middle">{html.escape(lab)}</text>'
        )
    return (
        f"<h3>{html.escape(title)}</h3>"
        f'<svg width="{width}" height="{height}" xmlns="http://www.w3.org/2000/svg">'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="#333"/>'
        + "".join(bars)
        + "</svg>"
    )


def _box_stats(values: list[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=float)
    return {
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "min": float(arr.min()),
        "q1": float(np.quantile(arr, 0.25)),
        "q3": float(np.quantile(arr, 0.75)),
        "max": float(arr.max()),
        "n": len(values),
    }


def stage_report(
    cfg: Config,
    run_dir: Path,
    manifest: RunManifest,
    prov,
    baseline_run: str | Path | None = None,
) -> dict:
    manifest.require("analyze", "report")
    figures = run_dir / "figures"
    figures.mkdir(exist_ok=True)

    rq1_header, rq1_rows = _read_csv(run_dir / "rq1.csv")
    rq3_header, rq3_rows = _read_csv(run_dir / "rq3_models.csv")
    diagnostics = json.loads((run_dir / "diagnostics.json").read_text(encoding="utf-8"))
    scores = [
        json.loads(line)
        for line in (run_dir / "scores.jsonl").read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]

    fig1 = figures / "rq1_activity_by_topic.csv"
    _write_csv(fig1, ["topic", "rule_count", "activity_count"], [r[:3] for r in rq1_rows])

    by_topic: dict[int, list[float]] = {}
    for s in scores:
        by_topic.setdefault(int(s["topic_id"]), []).append(float(s["internalization"]))
    fig2 = figures / "rq2_internalization_by_topic.csv"
    fig2_rows = []
    for t in sorted(by_topic):
        st = _box_stats(by_topic[t])
        fig2_rows.append(
            [t, _fmt(st["mean"]), _fmt(st["median"]), _fmt(st["min"]),
             _fmt(st["q1"]), _fmt(st["q3"]), _fmt(st["max"]), st["n"]]
        )
    _write_csv(fig2, ["topic", "mean", "median", "min", "q1", "q3", "max", "n"], fig2_rows)

    sections = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'>"
        "<title>Governance mining report</title>"
        "<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}"
        "td,th{border:1px solid #999;padding:3px 8px;font-size:13px}</style></head><body>",
        "<h1>Governance mining report</h1>",
        f"<p>Policy mode: {html.escape(cfg.policy.mode)}; providers: {html.escape(cfg.providers.mode)}.</p>",
        _html_table("Per-topic rules, activity, internalization (RQ1/RQ2)", rq1_header, rq1_rows),
        _svg_bars(
            "Governed activity per topic",
            [r[0] for r in rq1_rows],
            [float(r[2]) for r in rq1_rows],
        ),
        _svg_bars(
            "Mean internalization per topic",
            [str(r[0]) for r in fig2_rows],
            [float(r[1]) for r in fig2_rows],
        ),
        _html_table("Nested logistic models (RQ3)", rq3_header, rq3_rows),
    ]
    for rq in ("rq1", "rq2"):
        res = diagnostics.get(rq, {})
        if "r" in res:
            sections.append(
                f"<p>{rq.upper()} Pearson r = {_fmt(res['r'])}, p = {_fmt(res['p'])}, "
                f"n = {res['n']}.</p>"
            )
        elif "error" in res:
            sections.append(f"<p>{rq.upper()}: {html.escape(res['error'])}</p>")

    outputs = [fig1, fig2]
    counts = {"figures": 2}
    if baseline_run is not None:
        comparison = _compare_runs(run_dir, Path(baseline_run))
        comp_path = run_dir / "comparison.csv"
        _write_csv(
            comp_path,
            ["metric", "value"],
            [["topic_overlap_pct", _fmt(comparison["overlap_pct"])],
             ["assignment_correlation", _fmt(comparison["correlation"])]],
        )
        outputs.append(comp_path)
        sections.append(
            _html_table(
                "Policy-mode comparison vs baseline",
                ["metric", "value"],
                [["topic overlap (%)", _fmt(comparison["overlap_pct"])],
                 ["rule-assignment correlation", _fmt(comparison["correlation"])]],
            )
        )
        sections.append(
            _html_table(
                "Model table, baseline run", comparison["baseline_rq3"][0], comparison["baseline_rq3"][1]
            )
        )
        sections.append(_html_table("Model table, this run", rq3_header, rq3_rows))
        counts["compared_with"] = str(baseline_run)

    sections.append("</body></html>")
    report_path = run_dir / "report.html"
    atomic_write_text(report_path, "".join(sections))
    outputs.append(report_path)
    manifest.record(
        "report",
        inputs=[run_dir / "rq1.csv", run_dir / "rq3_models.csv", run_dir / "diagnostics.json"],
        outputs=outputs,
        counts=counts,
        provider=prov.name,
    )
    return counts


def _compare_runs(run_dir: Path, baseline: Path) -> dict:
    ours = run_dir / "topics.json"
    theirs = baseline / "topics.json"
    if not theirs.exists():
        raise PreconditionError(f"baseline run has no topics.json: run cluster in {baseline} first")
    tm_a = topic_model_from_dict(json.loads(theirs.read_text(encoding="utf-8")))
    tm_b = topic_model_from_dict(json.loads(ours.read_text(encoding="utf-8")))
    overlap, corr = compare_topic_models(tm_a, tm_b)
    baseline_rq3 = _read_csv(baseline / "rq3_models.csv") if (baseline / "rq3_models.csv").exists() else (["model"], [])
    return {"overlap_pct": overlap, "correlation": corr, "baseline_rq3": baseline_rq3}
