import json
import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from govmine.ingest.filtering import (
    DEFAULT_BOT_SENDERS,
    DEFAULT_REPORT_TEMPLATES,
    FilterConfig,
    filter_messages,
)
from govmine.ingest.language import HeuristicLangId, classify_language
from govmine.ingest.mailbox import (
    apply_section_exclusions,
    ingest_mailbox,
    read_policy_documents,
)
from govmine.ingest.sentences import segment_sentences, split_sentence_spans, strip_reply_noise
from govmine.ingest.types import EmailMessage, IngestStats, SentenceRecord, SourceRef

MBOX_TWO = """From dev1 Mon Jan  2 10:00:00 2023
From: Dev One <dev1@project.example.org>
Date: Mon, 02 Jan 2023 10:00:00 +0000
Message-ID: <m1@example.org>
Subject: vote

We vote today.

From dev2 Mon Jan  2 11:00:00 2023
From: Dev Two <dev2@project.example.org>
Date: Mon, 02 Jan 2023 11:00:00 +0000
Message-ID: <m2@example.org>
Subject: release

Release follows.
"""

MBOX_NO_DATE = """From dev1 Mon Jan  2 10:00:00 2023
From: Dev One <dev1@project.example.org>
Message-ID: <m3@example.org>
Subject: broken

No date header here.
"""

MBOX_MULTIPART = """From dev1 Mon Jan  2 10:00:00 2023
From: Dev One <dev1@project.example.org>
Date: Mon, 02 Jan 2023 10:00:00 +0000
Message-ID: <m4@example.org>
Subject: multipart
MIME-Version: 1.0
Content-Type: multipart/alternative; boundary="BOUND"

--BOUND
Content-Type: text/plain; charset="utf-8"

plain body text
--BOUND
Content-Type: text/html; charset="utf-8"

<html><body>html body text</body></html>
--BOUND--
"""


def _msg(sender="dev@x.org", body="hello world", mid="<a@b>"):
    from datetime import datetime, timezone

    return EmailMessage(
        project_id="p",
        message_id=mid,
        sender=sender,
        timestamp=datetime(2023, 1, 1, tzinfo=timezone.utc),
        subject="s",
        body=body,
    )


class TestIngestMailbox:
    def test_mbox_two_messages(self, tmp_path):
        p = tmp_path / "a.mbox"
        p.write_text(MBOX_TWO)
        msgs = ingest_mailbox(p, "proj")
        assert len(msgs) == 2
        assert msgs[0].message_id == "<m1@example.org>"
        assert msgs[0].body.strip() == "We vote today."

    def test_missing_date_skipped_and_counted(self, tmp_path):
        p = tmp_path / "a.mbox"
        p.write_text(MBOX_NO_DATE)
        stats = IngestStats()
        msgs = ingest_mailbox(p, "proj", stats)
        assert msgs == []
        assert stats.skipped == 1
        assert stats.reasons == {"missing-date": 1}

    def test_multipart_takes_plain_part_only(self, tmp_path):
        p = tmp_path / "a.mbox"
        p.write_text(MBOX_MULTIPART)
        (msg,) = ingest_mailbox(p, "proj")
        assert "plain body text" in msg.body
        assert "html" not in msg.body

    def test_duplicate_message_id_skipped(self, tmp_path):
        p = tmp_path / "a.jsonl"
        row = {"project": "p", "message_id": "<x@y>", "from": "a@b",
               "date": "2023-01-01T00:00:00+00:00", "subject": "s", "body": "hi"}
        p.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n")
        stats = IngestStats()
        msgs = ingest_mailbox(p, "p", stats)
        assert len(msgs) == 1
        assert stats.reasons == {"duplicate-message-id": 1}

    def test_missing_file_fatal(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ingest_mailbox(tmp_path / "none.mbox", "p")


class TestFiltering:
    def test_bot_sender_dropped(self):
        cfg = FilterConfig()
        kept = filter_messages([_msg(sender="jira@apache.org")], cfg)
        assert kept == []

    def test_report_template_dropped(self):
        cfg = FilterConfig()
        kept = filter_messages([_msg(body="Incubator PMC report for March\n...")], cfg)
        assert kept == []

    def test_ordinary_message_kept_verbatim(self):
        cfg = FilterConfig()
        m = _msg(body="let us vote on the release")
        assert filter_messages([m], cfg) == [m]

    def test_display_name_address_extraction(self):
        cfg = FilterConfig(bot_senders=["jira@*"])
        assert filter_messages([_msg(sender="JIRA Bot <jira@x.org>")], cfg) == []

    def test_empty_input(self):
        assert filter_messages([], FilterConfig()) == []

    @given(st.lists(st.sampled_from(
        [_msg(), _msg(sender="jira@x.org"), _msg(body="Incubator PMC report for X")]
    ), max_size=6))
    @settings(max_examples=30)
    def test_idempotent(self, msgs):
        cfg = FilterConfig(
            bot_senders=list(DEFAULT_BOT_SENDERS),
            report_templates=list(DEFAULT_REPORT_TEMPLATES),
        )
        once = filter_messages(msgs, cfg)
        assert filter_messages(once, cfg) == once


class TestSegmentation:
    def test_two_sentences(self):
        recs = segment_sentences(_msg(body="We vote today. Release follows."))
        assert [r.text for r in recs] == ["We vote today.", "Release follows."]

    def test_quoted_reply_stripped_entirely(self):
        recs = segment_sentences(_msg(body="> old text.\n> more old text.\n"))
        assert recs == []

    def test_abbreviation_not_split(self):
        recs = segment_sentences(_msg(body="e.g. the vote passed"))
        assert len(recs) == 1

    def test_signature_stripped(self):
        recs = segment_sentences(_msg(body="Real content here.\n-- \nJohn\nACME Corp"))
        assert [r.text for r in recs] == ["Real content here."]

    def test_sentence_indices_dense(self):
        recs = segment_sentences(_msg(body="One. Two. Three."))
        assert [r.source_ref.sentence_index for r in recs] == [0, 1, 2]

    def test_provenance_round_trip(self):
        body = "We vote today. Release follows soon after."
        msg = _msg(body=body)
        for rec in segment_sentences(msg):
            cleaned = strip_reply_noise(msg.body)
            a, b = rec.source_ref.char_start, rec.source_ref.char_end
            assert cleaned[a:b].strip() == rec.text
            assert rec.source_ref.message_id == msg.message_id

    @given(st.lists(st.sampled_from(
        ["We vote", "it passed", "thanks", "e.g", "Dr", "release 1.2"]
    ), min_size=1, max_size=8), st.lists(st.sampled_from([". ", "! ", "? ", "\n\n", " "]),
        min_size=1, max_size=8))
    @settings(max_examples=60)
    def test_spans_partition_text(self, chunks, seps):
        text = "".join(c + seps[i % len(seps)] for i, c in enumerate(chunks))
        spans = split_sentence_spans(text)
        # spans are ordered, non-overlapping, and jointly cover the text
        last = 0
        for a, b in spans:
            assert a >= last
            assert text[last:a].strip() == ""
            last = b
        assert text[last:].strip() == ""


class TestLanguage:
    def test_english_stopwords_kept(self):
        rec = SentenceRecord(SourceRef("p", "<m>", 0), "the quick brown fox jumps")
        classify_language(rec)
        assert rec.language == "en" and rec.kept

    def test_stack_trace_not_kept(self):
        rec = SentenceRecord(SourceRef("p", "<m>", 0), "at java.lang.Thread.run(Thread.java:748)")
        classify_language(rec)
        assert not rec.kept

    def test_empty_text_error(self):
        with pytest.raises(ValueError):
            HeuristicLangId().identify_one("")

    def test_french_identified(self):
        assert HeuristicLangId().identify_one("bonjour tout le monde et merci pour votre aide") == "fr"

    def test_kept_implies_english(self):
        texts = ["the vote passed today", "bonjour tout le monde", "xyzzy 12345", "ok"]
        for t in texts:
            rec = SentenceRecord(SourceRef("p", "<m>", 0), t)
            classify_language(rec)
            if rec.kept:
                assert rec.language == "en"


class TestPolicyDocuments:
    def test_read_and_exclude(self, tmp_path):
        p = tmp_path / "policies.jsonl"
        rows = [
            {"doc_id": "d1", "source": "guide", "section_path": ["A", "B"], "text": "Rule one ."},
            {"doc_id": "d2", "source": "guide", "section_path": ["A", "C"], "text": "Rule two ."},
        ]
        p.write_text("".join(json.dumps(r) + "\n" for r in rows))
        docs = read_policy_documents(p)
        assert len(docs) == 2
        out = apply_section_exclusions(docs, [["C"]])
        assert [d.excluded for d in out] == [False, True]

    def test_empty_section_path_rejected(self):
        from govmine.ingest.types import PolicyDocument

        with pytest.raises(ValueError):
            PolicyDocument(doc_id="d", source="s", section_path=(), text="t")
