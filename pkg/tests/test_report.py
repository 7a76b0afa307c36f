import json
import os

import pytest

from govmine.pipeline.manifest import sha256_file
from govmine.pipeline.stages import run_stage

from conftest import REPO
from test_pipeline import full_run  # noqa: F401  (shared module fixture)


def _read_csv_rows(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


class TestFigures:
    def test_rq1_figure_schema(self, full_run):
        _, run_dir, _ = full_run
        header, rows = _read_csv_rows(run_dir / "figures" / "rq1_activity_by_topic.csv")
        assert header == ["topic", "rule_count", "activity_count"]
        assert rows, "figure must not be empty"
        for row in rows:
            assert int(row[1]) > 0
            assert int(row[2]) > 0

    def test_rq2_figure_schema(self, full_run):
        _, run_dir, _ = full_run
        header, rows = _read_csv_rows(
            run_dir / "figures" / "rq2_internalization_by_topic.csv")
        assert header == ["topic", "mean", "median", "min", "q1", "q3", "max", "n"]
        for row in rows:
            mn, q1, med, q3, mx = (float(row[3]), float(row[4]), float(row[2]),
                                   float(row[5]), float(row[6]))
            assert mn <= q1 <= med <= q3 <= mx
            assert 0.0 <= float(row[1]) <= 1.0
            assert int(row[7]) > 0

    def test_figures_cover_all_scored_topics(self, full_run):
        _, run_dir, _ = full_run
        scores = [json.loads(line)
                  for line in (run_dir / "scores.jsonl").read_text().splitlines()]
        scored_topics = {s["topic_id"] for s in scores}
        _, rows = _read_csv_rows(
            run_dir / "figures" / "rq2_internalization_by_topic.csv")
        assert {int(r[0]) for r in rows} == scored_topics


class TestHtmlReport:
    def test_report_contains_model_table(self, full_run):
        _, run_dir, _ = full_run
        doc = (run_dir / "report.html").read_text()
        assert "Nested logistic models" in doc
        assert "Governed activity per topic" in doc
        assert "<svg" in doc

    def test_regeneration_byte_identical(self, full_run):
        cfg, run_dir, _ = full_run
        targets = [run_dir / "report.html",
                   run_dir / "figures" / "rq1_activity_by_topic.csv",
                   run_dir / "figures" / "rq2_internalization_by_topic.csv"]
        before = [sha256_file(p) for p in targets]
        cwd = os.getcwd()
        os.chdir(REPO)
        try:
            run_stage("report", cfg, run_dir)
        finally:
            os.chdir(cwd)
        assert [sha256_file(p) for p in targets] == before


class TestComparison:
    def test_report_with_baseline_emits_comparison(self, full_run):
        cfg, run_dir, _ = full_run
        cwd = os.getcwd()
        os.chdir(REPO)
        try:
            # a run compared against itself matches perfectly
            counts = run_stage("report", cfg, run_dir, baseline_run=run_dir)
        finally:
            os.chdir(cwd)
        assert counts["compared_with"] == str(run_dir)
        header, rows = _read_csv_rows(run_dir / "comparison.csv")
        assert header == ["metric", "value"]
        values = dict(rows)
        assert float(values["topic_overlap_pct"]) == pytest.approx(100.0)
        assert float(values["assignment_correlation"]) == pytest.approx(1.0)
