"""Reconstitution of SRL frames into standalone activity texts.

Each frame becomes one activity: its argument and verb spans are sorted
by original position, adjacent spans are merged so intra-chunk spacing
survives, and the pieces are joined left to right.  The result reads as
a self-contained clause drawn entirely from the source sentence.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from ..ingest.types import PolicyDocument, SentenceRecord, SourceRef
from ..ingest.sentences import segment_sentences
from .srl import SRLFrame, SRLProvider, FallbackSRL, extract_frames

_EDGE_PUNCT = " \t\n.,;:!?\"'"


@dataclass(frozen=True)
class ActivityUnit:
    activity_id: str
    text: str
    verb: str
    source_ref: SourceRef
    frame_index: int


@dataclass(frozen=True)
class PolicyRule:
    rule_id: str
    text: str
    doc_id: str
    excluded: bool = False


def _merge_spans(sentence: str, spans: list[tuple[int, int]]) -> list[str]:
    """Merge spans whose gap is pure whitespace; return text pieces in order."""
    pieces: list[str] = []
    cur_a, cur_b = spans[0]
    for a, b in spans[1:]:
        if a <= cur_b or sentence[cur_b:a].strip() == "":
            cur_b = max(cur_b, b)
        else:
            pieces.append(sentence[cur_a:cur_b])
            cur_a, cur_b = a, b
    pieces.append(sentence[cur_a:cur_b])
    return pieces


def reconstitute_text(sentence: str, frame: SRLFrame) -> str:
    spans = frame.all_spans()
    for a, b in spans:
        if a < 0 or b > len(sentence):
            raise ValueError(f"frame span ({a},{b}) outside sentence")
    joined = " ".join(_merge_spans(sentence, spans))
    joined = re.sub(r"\s+", " ", joined)
    return joined.strip(_EDGE_PUNCT)


def _activity_id(source_ref: SourceRef, frame_index: int) -> str:
    key = f"{source_ref.origin_id}|{source_ref.message_id}|{source_ref.sentence_index}|{frame_index}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def reconstitute_activities(
    record: SentenceRecord, frames: list[SRLFrame]
) -> list[ActivityUnit]:
    """One ActivityUnit per frame, in frame order."""
    units = []
    for idx, frame in enumerate(frames):
        text = reconstitute_text(record.text, frame)
        if not text:
            continue
        units.append(
            ActivityUnit(
                activity_id=_activity_id(record.source_ref, idx),
                text=text,
                verb=frame.verb,
                source_ref=record.source_ref,
                frame_index=idx,
            )
        )
    return units


def extract_activities(
    record: SentenceRecord, provider: SRLProvider | None = None
) -> list[ActivityUnit]:
    provider = provider or FallbackSRL()
    return reconstitute_activities(record, extract_frames(record, provider))


def parse_policy_rules(
    docs: list[PolicyDocument], provider: SRLProvider | None = None
) -> list[PolicyRule]:
    """Flatten policy documents into one rule per reconstituted frame."""
    provider = provider or FallbackSRL()
    rules: list[PolicyRule] = []
    for doc in docs:
        for sent in segment_sentences(doc):
            sent.kept = True  # policy corpus is curated English
            sent.language = "en"
            for unit in extract_activities(sent, provider):
                rules.append(
                    PolicyRule(
                        rule_id=f"{doc.doc_id}:{sent.source_ref.sentence_index}:{unit.frame_index}",
                        text=unit.text,
                        doc_id=doc.doc_id,
                        excluded=doc.excluded,
                    )
                )
    return rules
