"""Mailing-list and policy-document readers.

Two email input formats are supported: RFC-4155 mbox, and JSONL with
fields {project, message_id, from, date, subject, body}.  Policy
documents arrive as JSONL {doc_id, source, section_path, text}.
"""

from __future__ import annotations

import json
import mailbox
from datetime import datetime, timezone
from email.header import decode_header, make_header
from email.message import Message
from email.utils import parsedate_to_datetime
from pathlib import Path

from .types import EmailMessage, IngestStats, PolicyDocument


def _decode_subject(raw) -> str:
    if raw is None:
        return ""
    try:
        return str(make_header(decode_header(str(raw))))
    except Exception:
        return str(raw)


def _plain_body(msg: Message) -> str | None:
    """Decoded text/plain body; for multipart, the text/plain part only."""
    parts = []
    if msg.is_multipart():
        for part in msg.walk():
            if part.get_content_type() == "text/plain" and part.get_filename() is None:
                parts.append(part)
    elif msg.get_content_type() in ("text/plain", "text"):
        parts.append(msg)
    for part in parts:
        payload = part.get_payload(decode=True)
        if payload is None:
            continue
        charset = part.get_content_charset() or "utf-8"
        try:
            return payload.decode(charset, errors="strict")
        except (LookupError, UnicodeDecodeError):
            try:
                return payload.decode("utf-8", errors="strict")
            except UnicodeDecodeError:
                return None
    return None


def _message_to_record(msg: Message, project_id: str) -> EmailMessage | str:
    """Convert one parsed message; returns a skip-reason string on failure."""
    message_id = msg.get("Message-ID")
    if not message_id:
        return "missing-message-id"
    date_raw = msg.get("Date")
    if not date_raw:
        return "missing-date"
    try:
        ts = parsedate_to_datetime(date_raw)
    except (TypeError, ValueError):
        return "unparseable-date"
    if ts is None:
        return "unparseable-date"
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    body = _plain_body(msg)
    if body is None:
        return "undecodable-body"
    return EmailMessage(
        project_id=project_id,
        message_id=message_id.strip(),
        sender=str(msg.get("From", "")).strip(),
        timestamp=ts.astimezone(timezone.utc),
        subject=_decode_subject(msg.get("Subject")),
        body=body,
    )


def ingest_mailbox(
    path: str | Path, project_id: str, stats: IngestStats | None = None
) -> list[EmailMessage]:
    """Parse an mbox or JSONL archive into EmailMessage records.

    Malformed individual messages are skipped and counted in ``stats``;
    an unreadable file raises.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"mail archive not found: {path}")
    stats = stats if stats is not None else IngestStats()
    if path.suffix in (".jsonl", ".json", ".ndjson"):
        return _ingest_jsonl(path, project_id, stats)

    out: list[EmailMessage] = []
    seen: set[str] = set()
    for msg in mailbox.mbox(str(path)):
        rec = _message_to_record(msg, project_id)
        if isinstance(rec, str):
            stats.skip(rec)
            continue
        if rec.message_id in seen:
            stats.skip("duplicate-message-id")
            continue
        seen.add(rec.message_id)
        stats.parsed += 1
        out.append(rec)
    return out


def _ingest_jsonl(path: Path, project_id: str, stats: IngestStats) -> list[EmailMessage]:
    out: list[EmailMessage] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError:
                stats.skip("bad-json")
                continue
            try:
                ts = datetime.fromisoformat(str(row["date"]))
            except (KeyError, ValueError):
                stats.skip("unparseable-date")
                continue
            if ts.tzinfo is None:
                ts = ts.replace(tzinfo=timezone.utc)
            mid = str(row.get("message_id", "")).strip()
            if not mid:
                stats.skip("missing-message-id")
                continue
            if mid in seen:
                stats.skip("duplicate-message-id")
                continue
            if "body" not in row:
                stats.skip("undecodable-body")
                continue
            seen.add(mid)
            stats.parsed += 1
            out.append(
                EmailMessage(
                    project_id=str(row.get("project", project_id)),
                    message_id=mid,
                    sender=str(row.get("from", "")).strip(),
                    timestamp=ts.astimezone(timezone.utc),
                    subject=str(row.get("subject", "")),
                    body=str(row["body"]),
                )
            )
    return out


def read_policy_documents(path: str | Path) -> list[PolicyDocument]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"policy file not found: {path}")
    docs = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            docs.append(
                PolicyDocument(
                    doc_id=str(row["doc_id"]),
                    source=str(row["source"]),
                    section_path=tuple(row["section_path"]),
                    text=str(row["text"]),
                )
            )
    return docs


def apply_section_exclusions(
    docs: list[PolicyDocument], excluded_sections: list[list[str]]
) -> list[PolicyDocument]:
    """Flag documents whose section_path matches a configured exclusion.

    A document is excluded when its section_path ends with (or equals)
    one of the listed heading paths.
    """
    patterns = [tuple(p) for p in excluded_sections]

    def matches(doc: PolicyDocument) -> bool:
        for pat in patterns:
            if len(pat) <= len(doc.section_path) and doc.section_path[-len(pat):] == pat:
                return True
        return False

    return [
        PolicyDocument(
            doc_id=d.doc_id,
            source=d.source,
            section_path=d.section_path,
            text=d.text,
            excluded=matches(d),
        )
        for d in docs
    ]
