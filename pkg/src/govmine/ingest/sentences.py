"""Quoted-reply stripping and sentence segmentation.

Quoted lines (">" prefix), attribution lines, and signature blocks
(after a "-- " delimiter) are removed before segmentation so quoted
activities are not double-counted.  Segmentation partitions the cleaned
body: every non-whitespace character lands in exactly one sentence.
"""

from __future__ import annotations

import re

from .types import EmailMessage, PolicyDocument, SentenceRecord, SourceRef

_QUOTE_LINE = re.compile(r"^\s*>")
_ATTRIBUTION = re.compile(r"^On .* wrote:\s*$")
_SIG_DELIM = re.compile(r"^--\s*$")

# tokens before a period that do not end a sentence
ABBREVIATIONS = {
    "e.g", "i.e", "etc", "vs", "cf", "al", "mr", "mrs", "ms", "dr", "prof",
    "no", "nos", "inc", "ltd", "co", "approx", "resp", "fig", "sec", "ref",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct",
    "nov", "dec", "st", "jr", "sr",
}

_TERMINATORS = ".!?"


def strip_reply_noise(body: str) -> str:
    """Remove quoted replies, attribution lines, and the signature block."""
    lines = body.splitlines()
    kept: list[str] = []
    for line in lines:
        if _SIG_DELIM.match(line):
            break
        if _QUOTE_LINE.match(line) or _ATTRIBUTION.match(line):
            continue
        kept.append(line)
    return "\n".join(kept)


def _is_boundary(text: str, i: int) -> bool:
    """True if the terminator at position i ends a sentence."""
    if i + 1 < len(text) and not text[i + 1].isspace():
        return False  # e.g. "2.1", "java.lang"
    if text[i] == ".":
        j = i - 1
        while j >= 0 and not text[j].isspace():
            j -= 1
        token = text[j + 1 : i].lower().rstrip(".")
        token = token.lstrip("(\"'")
        if token in ABBREVIATIONS:
            return False
        if len(token) == 1 and token.isalpha():
            return False  # initials like "J."
    return True


def split_sentence_spans(text: str) -> list[tuple[int, int]]:
    """Sentence spans over ``text``; consecutive spans abut exactly."""
    spans: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS and _is_boundary(text, i):
            # absorb any trailing terminators / closing quotes
            j = i + 1
            while j < n and text[j] in _TERMINATORS + "\"')":
                j += 1
            spans.append((start, j))
            start = j
            i = j
            continue
        if ch == "\n" and i + 1 < n and text[i + 1] == "\n":
            spans.append((start, i))
            start = i
        i += 1
    if start < n:
        spans.append((start, n))
    return [(a, b) for a, b in spans if text[a:b].strip()]


def segment_sentences(item: EmailMessage | PolicyDocument) -> list[SentenceRecord]:
    """Split an email body or policy text into ordered SentenceRecords."""
    if isinstance(item, EmailMessage):
        cleaned = strip_reply_noise(item.body)
        origin, message_id = item.project_id, item.message_id
    else:
        cleaned = item.text
        origin, message_id = item.doc_id, None
    records: list[SentenceRecord] = []
    for idx, (a, b) in enumerate(split_sentence_spans(cleaned)):
        records.append(
            SentenceRecord(
                source_ref=SourceRef(
                    origin_id=origin,
                    message_id=message_id,
                    sentence_index=idx,
                    char_start=a,
                    char_end=b,
                ),
                text=cleaned[a:b].strip(),
            )
        )
    return records
