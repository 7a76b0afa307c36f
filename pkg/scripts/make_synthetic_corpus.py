#!/usr/bin/env python3
"""Generate the bundled synthetic corpus: 3 projects, 2 topics, 300 emails.

Every governed email body is built from a template that the fallback
labeler provably turns into exactly one activity (the script asserts
this), so the expected per-project/per-topic counts are exact by
construction and stored alongside the data in expected_tally.json.

Outputs under --out (default data/synthetic):
  emails_<project>.jsonl        mailing-list archives
  policies.jsonl                20-rule policy corpus (main + control)
  policies_bridge.jsonl         20-rule variant with a topic-bridging doc
  covariates.csv                project covariates + outcomes
  expected_tally.json           hand tally used by the acceptance tests
  config.toml / config_control.toml / config_treatment.toml
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from govmine.extract.srl import FallbackSRL

# one template per topic with a single varying token keeps within-topic
# distances uniform, so density clustering finds exactly two clusters
_RELEASE_SLOT = ["vote", "source", "signed", "approved", "staged",
                 "final", "candidate", "binary", "checked", "packaged"]
_ONBOARD_SLOT = ["new", "elected", "active", "nominated", "proposed",
                 "second", "third", "senior", "junior", "first"]

RELEASE_VARIANTS = [
    f"The release manager must send the {x} artifacts to the dev list ."
    for x in _RELEASE_SLOT
]

ONBOARD_VARIANTS = [
    f"The mentor must invite the {y} committer to the private list ."
    for y in _ONBOARD_SLOT
]

CHATTER = [
    "ok thanks",
    "hi all",
]

FRENCH = [
    "bonjour tout le monde et merci pour votre aide sur ce sujet .",
    "je ne suis pas disponible cette semaine mais je vais regarder le rapport .",
]

REPORT_BODY = "Incubator PMC report for October.\nAll is well."

# (project, releases, onboards); 4 bot + 2 report + 2 french + 2 chatter each
PLAN = {
    "amber": (50, 40),
    "basalt": (45, 45),
    "cobalt": (40, 50),
}

# release rules: docA1 carries the topic, docA2 restates docA1 vocabulary
# so the control-mode exclusion cannot change the topic's word profile
DOC_A1 = [
    "The release manager must send the vote artifacts to the dev list .",
    "The release manager must sign the release artifacts before the vote .",
    "The ipmc must send the vote result to the dev list .",
    "The release manager must upload the artifacts to the dev list .",
    "The community must vote on the release artifacts .",
    "The release manager must publish the release artifacts .",
    "The release manager must verify the release artifacts before the vote .",
]
# tokens of these two rules stay inside the union of the other release
# rules, so excluding this section cannot change the topic's top words
DOC_A2 = [
    "The release manager must send the release artifacts to the dev list .",
    "The ipmc must upload the vote result to the dev list .",
]
DOC_B1 = [
    "The mentor must invite the new committer to the private list .",
    "The mentor must add the new committer to the roster .",
    "The pmc must invite the elected committer to the private list .",
    "The mentor must create the committer account .",
    "The secretary must record the committer invitation in the roster .",
    "The mentor must announce the new committer on the private list .",
    "The pmc must vote on the new committer nomination before the invitation .",
    "The mentor must wait for the icla before the committer invitation .",
    "The secretary must file the committer icla before the invitation .",
]
DOC_BRIDGE = [
    "The release manager must send the vote artifacts to the dev list .",
    "The mentor must invite the new committer to the private list .",
]

COVARIATES = [
    # project, outcome, committers, commits, loc, developer_emails, incubation_months
    ("amber", 1, 12.0, 340.0, 152000, 210.0, 18),
    ("basalt", 1, 9.5, 260.0, 98000, 175.0, 24),
    ("cobalt", 0, 4.0, 80.0, 41000, 60.0, 30),
]


def _assert_single_frame(srl: FallbackSRL, sentence: str) -> None:
    frames = srl.frames_for_sentence(sentence)
    if len(frames) != 1:
        raise AssertionError(f"{len(frames)} frames for: {sentence!r}")


def _email(project: str, n: int, body: str, sender: str = None) -> dict:
    return {
        "project": project,
        "message_id": f"<{project}-{n:04d}@lists.example.org>",
        "from": sender or f"dev{n % 7}@{project}.example.org",
        "date": f"2023-{(n % 12) + 1:02d}-{(n % 27) + 1:02d}T10:{n % 60:02d}:00+00:00",
        "subject": f"[{project}] thread {n}",
        "body": body,
    }


def make_project(project: str, releases: int, onboards: int, rng: random.Random) -> list[dict]:
    emails = []
    n = 0
    for i in range(releases):
        body = RELEASE_VARIANTS[i % len(RELEASE_VARIANTS)] + "\n\n" + CHATTER[i % 2]
        emails.append(_email(project, n, body)); n += 1
    for i in range(onboards):
        body = ONBOARD_VARIANTS[i % len(ONBOARD_VARIANTS)] + "\n\n" + CHATTER[i % 2]
        emails.append(_email(project, n, body)); n += 1
    for i in range(4):
        emails.append(_email(project, n, "Issue updated.", sender=f"jira@{project}.example.org")); n += 1
    for i in range(2):
        emails.append(_email(project, n, REPORT_BODY)); n += 1
    for i in range(2):
        emails.append(_email(project, n, FRENCH[i])); n += 1
    for i in range(2):
        emails.append(_email(project, n, CHATTER[i])); n += 1
    rng.shuffle(emails)
    return emails


def _policy_rows(include_bridge: bool) -> list[dict]:
    rows = [
        {"doc_id": "release-policy", "source": "policy-guide",
         "section_path": ["Releases", "Voting"], "text": " ".join(DOC_A1)},
        {"doc_id": "release-examples", "source": "policy-guide",
         "section_path": ["Releases", "Examples"], "text": " ".join(DOC_A2)},
        {"doc_id": "committer-policy", "source": "policy-guide",
         "section_path": ["Community", "New committers"], "text": " ".join(DOC_B1)},
    ]
    if include_bridge:
        rows.append(
            {"doc_id": "bridge-policy", "source": "policy-guide",
             "section_path": ["Community", "Release participation"], "text": " ".join(DOC_BRIDGE)}
        )
    else:
        # keep 20 rules total: fold the two extra sentences into docA2's section
        rows.append(
            {"doc_id": "release-examples-2", "source": "policy-guide",
             "section_path": ["Releases", "More examples"],
             "text": "The ipmc must send the release artifacts to the dev list . "
                     "The release manager must verify the vote result ."}
        )
    return rows


def _config_text(out: Path, policies: str, excluded: list[list[str]]) -> str:
    mailboxes = "\n".join(
        f'{p} = "{(out / f"emails_{p}.jsonl").as_posix()}"' for p in sorted(PLAN)
    )
    excl = ", ".join(json.dumps(e) for e in excluded)
    return f"""[paths]
policies = "{(out / policies).as_posix()}"
covariates = "{(out / 'covariates.csv').as_posix()}"

[paths.mailboxes]
{mailboxes}

[policy]
mode = "full"
excluded_sections = [{excl}]

[cluster]
min_cluster_size = [20, 30]
min_samples = [5]
n_neighbors = [10]
top_n_words = 10

[providers]
mode = "fallback"
embed_dim = 512
seed = 0
"""


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/synthetic")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    srl = FallbackSRL()
    for s in RELEASE_VARIANTS + ONBOARD_VARIANTS + DOC_A1 + DOC_A2 + DOC_B1 + DOC_BRIDGE:
        _assert_single_frame(srl, s)
    for s in CHATTER:
        assert srl.frames_for_sentence(s) == [], s

    rng = random.Random(args.seed)
    total_emails = 0
    for project, (rel, onb) in PLAN.items():
        emails = make_project(project, rel, onb, rng)
        total_emails += len(emails)
        with open(out / f"emails_{project}.jsonl", "w", encoding="utf-8") as fh:
            for e in emails:
                fh.write(json.dumps(e, sort_keys=True) + "\n")

    for name, bridge in (("policies.jsonl", False), ("policies_bridge.jsonl", True)):
        with open(out / name, "w", encoding="utf-8") as fh:
            for row in _policy_rows(bridge):
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    with open(out / "covariates.csv", "w", encoding="utf-8") as fh:
        fh.write("project_id,outcome,committers,commits,loc,developer_emails,incubation_months\n")
        for row in COVARIATES:
            fh.write(",".join(str(v) for v in row) + "\n")

    tally = {
        "emails_total": total_emails,
        "emails_per_project": {p: sum(PLAN[p]) + 10 for p in PLAN},
        "emails_kept_per_project": {p: sum(PLAN[p]) + 4 for p in PLAN},
        "activities_per_project": {
            p: {"release": PLAN[p][0], "onboard": PLAN[p][1]} for p in PLAN
        },
        "activities_total": sum(r + o for r, o in PLAN.values()),
        "rules_total": 20,
        "rules_per_topic": {"release": len(DOC_A1) + len(DOC_A2) + 2, "onboard": len(DOC_B1)},
        "topic_marker_docs": {"release": "release-policy", "onboard": "committer-policy"},
    }
    with open(out / "expected_tally.json", "w", encoding="utf-8") as fh:
        json.dump(tally, fh, indent=2, sort_keys=True)
        fh.write("\n")

    (out / "config.toml").write_text(_config_text(out, "policies.jsonl", []), encoding="utf-8")
    (out / "config_control.toml").write_text(
        _config_text(out, "policies.jsonl", [["Releases", "Examples"]]), encoding="utf-8"
    )
    (out / "config_treatment.toml").write_text(
        _config_text(out, "policies_bridge.jsonl", [["Community", "Release participation"]]),
        encoding="utf-8",
    )
    print(f"wrote synthetic corpus to {out}: {total_emails} emails, 20 rules")


if __name__ == "__main__":
    main()
