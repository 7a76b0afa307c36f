"""Corpus record types shared across ingest stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime


@dataclass(frozen=True)
class EmailMessage:
    project_id: str
    message_id: str
    sender: str
    timestamp: datetime
    subject: str
    body: str
    list_name: str = "dev"


@dataclass(frozen=True)
class PolicyDocument:
    doc_id: str
    source: str
    section_path: tuple[str, ...]
    text: str
    excluded: bool = False

    def __post_init__(self):
        if not self.section_path:
            raise ValueError(f"policy doc {self.doc_id} has empty section_path")


@dataclass(frozen=True)
class SourceRef:
    """Provenance pointer: which source, which message/doc, which sentence."""

    origin_id: str  # project_id for emails, doc_id for policy documents
    message_id: str | None
    sentence_index: int
    char_start: int = 0
    char_end: int = 0


@dataclass
class SentenceRecord:
    source_ref: SourceRef
    text: str
    language: str = "und"
    kept: bool = False


@dataclass
class IngestStats:
    parsed: int = 0
    skipped: int = 0
    reasons: dict = field(default_factory=dict)

    def skip(self, reason: str) -> None:
        self.skipped += 1
        self.reasons[reason] = self.reasons.get(reason, 0) + 1
