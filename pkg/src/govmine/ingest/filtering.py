"""Bot-sender and report-template filtering.

Automated notifications (JIRA, GitHub, build bots) are matched by glob
patterns on the sender address; periodic administrative reports by
literal prefixes of the message body.  Both pattern lists live in
config, not code.
"""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass, field

from .types import EmailMessage

DEFAULT_BOT_SENDERS = [
    "jira@*",
    "*@issues.*",
    "git@*",
    "gitbox@*",
    "notifications@github.com",
    "*jenkins*@*",
    "buildbot@*",
    "hudson@*",
    "no-reply@*",
    "noreply@*",
]

DEFAULT_REPORT_TEMPLATES = [
    "Incubator PMC report for",
    "Podling report:",
    "Shepherd/Mentor notes:",
]


@dataclass
class FilterConfig:
    bot_senders: list[str] = field(default_factory=lambda: list(DEFAULT_BOT_SENDERS))
    report_templates: list[str] = field(
        default_factory=lambda: list(DEFAULT_REPORT_TEMPLATES)
    )
    excluded_sections: list[list[str]] = field(default_factory=list)


def _sender_address(sender: str) -> str:
    # "Name <addr@host>" -> "addr@host"
    if "<" in sender and ">" in sender:
        return sender[sender.rfind("<") + 1 : sender.rfind(">")].strip().lower()
    return sender.strip().lower()


def is_bot_sender(sender: str, patterns: list[str]) -> bool:
    addr = _sender_address(sender)
    return any(fnmatch.fnmatch(addr, pat.lower()) for pat in patterns)


def is_report_body(body: str, templates: list[str]) -> bool:
    head = body.lstrip()
    return any(head.startswith(t) for t in templates)


def filter_messages(msgs: list[EmailMessage], config: FilterConfig) -> list[EmailMessage]:
    """Drop automated notifications and fixed-format reports; keep the rest."""
    return [
        m
        for m in msgs
        if not is_bot_sender(m.sender, config.bot_senders)
        and not is_report_body(m.body, config.report_templates)
    ]
