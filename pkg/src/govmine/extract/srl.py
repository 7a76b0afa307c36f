"""Semantic-role frames and the built-in fallback labeler.

The fallback is a dependency-free clause splitter: it chunks a sentence
into subordinate-clause modifiers, subject spans, verb groups, and
post-verb material, then emits one frame per finite head verb.  It is
deliberately conservative — auxiliaries, infinitive complements, bare
gerunds, and verbs inside subordinate clauses never spawn frames.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol, Sequence

Span = tuple[int, int]


@dataclass(frozen=True)
class Argument:
    role: str
    text: str
    span: Span


@dataclass(frozen=True)
class SRLFrame:
    verb: str
    verb_span: Span
    arguments: tuple[Argument, ...]

    def all_spans(self) -> list[Span]:
        return sorted([self.verb_span] + [a.span for a in self.arguments])


class SRLProvider(Protocol):
    name: str

    def frames_batch(self, sentences: Sequence[str]) -> list[list[SRLFrame]]: ...


# ---------------------------------------------------------------- lexicon

MODALS = {"will", "would", "shall", "should", "can", "could", "may", "might",
          "must", "'ll", "'d", "wo", "ca", "need"}
NEGATIONS = {"not", "n't", "never"}
AUX_BE = {"am", "is", "are", "was", "were", "be", "been", "being", "'s", "'re", "'m"}
AUX_HAVE = {"have", "has", "had", "'ve"}
AUX_DO = {"do", "does", "did"}
CHAIN_FILLERS = {"able", "going", "about", "to"}
GROUP_ADVERBS = {"then", "just", "also", "still", "already", "now", "soon",
                 "really", "please", "first", "finally", "again"}
DETERMINERS = {"the", "a", "an", "this", "that", "these", "those", "my", "our",
               "your", "their", "its", "his", "her", "any", "no", "each",
               "every", "some", "such"}
TEMPORAL_SUBORD = {"after", "before", "when", "while", "until", "once", "whenever"}
OTHER_SUBORD = {"if", "unless", "because", "since", "although", "though",
                "whereas", "whether"}
SUBORDINATORS = TEMPORAL_SUBORD | OTHER_SUBORD
CLAUSE_COORDS = {"so", "but", "yet"}

_BASE_VERBS = """
accept add address adjust adopt agree announce answer apply approve archive
ask assign attach attend audit backup branch build cancel change check choose
clean close comment commit communicate compile complete comply configure
confirm connect contribute coordinate copy correct create decide delay delete
deliver deploy describe design develop disagree discuss document download
draft drop edit elect enable encourage evaluate execute expect explain export
fail file fill finish fix flag follow fork format forward fulfill gather
give go graduate grant handle help host identify implement import improve
include incorporate install introduce invite join keep know label land leave
link list log maintain make manage meet mentor merge migrate monitor move
need note notify nominate observe open organize own package pass patch pause
pay perform plan point post postpone prepare present print process produce
propose provide publish push raise ratify reach read rebase rebuild receive
recommend record reduce refer reject release remind remove rename reopen
reply report request require reschedule resolve respond restart restore
retire return review revert run schedule see select send set settle share
ship sign skip solve specify split sponsor start state stop store submit
suggest summarize support switch sync tag take tell test track transfer
trigger try update upgrade upload use validate verify vote wait want warn
welcome work write
""".split()

_IRREGULAR = {
    "send": ["sent"], "take": ["took", "taken"], "give": ["gave", "given"],
    "go": ["went", "gone"], "see": ["saw", "seen"], "know": ["knew", "known"],
    "make": ["made"], "tell": ["told"], "write": ["wrote", "written"],
    "read": ["read"], "choose": ["chose", "chosen"], "meet": ["met"],
    "leave": ["left"], "run": ["ran"], "find": ["found"], "hold": ["held"],
    "keep": ["kept"], "build": ["built"], "pay": ["paid"], "set": ["set"],
    "put": ["put"], "let": ["let"], "say": ["said"], "think": ["thought"],
}

_DOUBLE_FINAL = {"plan", "stop", "drop", "ship", "tag", "log", "flag",
                 "commit", "submit", "refer", "split", "drag", "skip", "sync"}


def _inflections(base: str) -> set[str]:
    forms = {base}
    # third person singular
    if re.search(r"(s|x|z|ch|sh|o)$", base):
        forms.add(base + "es")
    elif base.endswith("y") and len(base) > 1 and base[-2] not in "aeiou":
        forms.add(base[:-1] + "ies")
    else:
        forms.add(base + "s")
    stem = base
    if base in _DOUBLE_FINAL:
        stem = base + base[-1]
    if base in _IRREGULAR:
        forms.update(_IRREGULAR[base])
    elif base.endswith("e"):
        forms.add(base + "d")
    elif base.endswith("y") and len(base) > 1 and base[-2] not in "aeiou":
        forms.add(base[:-1] + "ied")
    else:
        forms.add(stem + "ed")
    if base.endswith("e") and not base.endswith(("ee", "ye", "oe")):
        forms.add(base[:-1] + "ing")
    else:
        forms.add(stem + "ing")
    return forms


VERB_FORMS: dict[str, str] = {}
for _b in _BASE_VERBS:
    for _f in _inflections(_b):
        VERB_FORMS.setdefault(_f, _b)
for _b, _irr in _IRREGULAR.items():
    for _f in _irr:
        VERB_FORMS.setdefault(_f, _b)


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(r"\w+(?:[.'\-:/@]\w+)*|[^\w\s]")
_CLITICS = ("'ll", "'ve", "'re", "'d", "'m", "'s", "n't")


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int

    @property
    def low(self) -> str:
        return self.text.lower()


def tokenize_with_spans(sentence: str) -> list[Token]:
    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(sentence):
        text, start = m.group(0), m.start()
        split_at = None
        for cl in _CLITICS:
            if text.lower().endswith(cl) and len(text) > len(cl):
                split_at = len(text) - len(cl)
                break
        if split_at:
            tokens.append(Token(text[:split_at], start, start + split_at))
            tokens.append(Token(text[split_at:], start + split_at, m.end()))
        else:
            tokens.append(Token(text, start, m.end()))
    return tokens


def _is_punct(tok: Token) -> bool:
    return not any(c.isalnum() for c in tok.text)


# ---------------------------------------------------------------- chunking

@dataclass
class _VerbGroup:
    head: int               # token index of the head verb
    chain: list[int]        # modal/aux/filler token indices
    negs: list[int]
    adverbs: list[int]


def _find_modifier_chunks(tokens: list[Token]) -> list[tuple[int, int, str]]:
    """(start, end, role) token ranges for subordinate-clause modifiers."""
    chunks = []
    i = 0
    n = len(tokens)
    while i < n:
        low = tokens[i].low
        if low in SUBORDINATORS and (i + 1 < n and tokens[i + 1].low != ","):
            j = i + 1
            while j < n and tokens[j].low not in (",", ";"):
                j += 1
            role = "ARGM-TMP" if low in TEMPORAL_SUBORD else (
                "ARGM-CAU" if low in ("because", "since") else "ARGM-ADV"
            )
            chunks.append((i, j, role))
            i = j
        i += 1
    return chunks


def _split_clauses(tokens: list[Token], in_modifier: list[bool]) -> list[list[int]]:
    """Clause spans as lists of token indices (modifier tokens included)."""
    clauses: list[list[int]] = [[]]
    i = 0
    n = len(tokens)
    while i < n:
        if not in_modifier[i]:
            if tokens[i].low == ";":
                clauses.append([])
                i += 1
                continue
            if (
                tokens[i].low == ","
                and i + 1 < n
                and tokens[i + 1].low in CLAUSE_COORDS
                and not in_modifier[i + 1]
            ):
                clauses.append([])
                i += 2
                continue
        clauses[-1].append(i)
        i += 1
    return [c for c in clauses if c]


def _find_verb_groups(
    tokens: list[Token], clause: list[int], in_modifier: list[bool]
) -> list[_VerbGroup]:
    groups: list[_VerbGroup] = []
    idx = [i for i in clause if not in_modifier[i]]
    pos = 0
    seen_group = False
    while pos < len(idx):
        i = idx[pos]
        low = tokens[i].low
        starts_chain = low in MODALS or low in AUX_BE or low in AUX_HAVE or low in AUX_DO
        coord_continue = False
        if not starts_chain and low in ("and", "or") and seen_group:
            # coordinated verb group: "and (then) wait ..."
            look = pos + 1
            advs = []
            while look < len(idx) and tokens[idx[look]].low in GROUP_ADVERBS:
                advs.append(idx[look])
                look += 1
            if look < len(idx) and _is_bare_verb(tokens, idx, look):
                groups.append(_VerbGroup(head=idx[look], chain=[], negs=[], adverbs=advs))
                pos = look + 1
                continue
        if starts_chain:
            group, nxt = _consume_chain(tokens, idx, pos)
            if group is not None:
                groups.append(group)
                seen_group = True
                pos = nxt
                continue
        elif _is_bare_verb(tokens, idx, pos) and not seen_group:
            groups.append(_VerbGroup(head=i, chain=[], negs=[], adverbs=[]))
            seen_group = True
            pos += 1
            continue
        elif _is_bare_verb(tokens, idx, pos) and seen_group:
            pos += 1
            continue
        pos += 1
        del coord_continue
    return groups


def _is_bare_verb(tokens: list[Token], idx: list[int], pos: int) -> bool:
    """A finite lexicon verb outside any aux chain."""
    i = idx[pos]
    low = tokens[i].low
    if low not in VERB_FORMS:
        return False
    if low.endswith("ing"):
        return False  # gerund without be-aux
    prev = tokens[idx[pos - 1]].low if pos > 0 else None
    if prev in DETERMINERS or prev == "to":
        return False  # noun usage / infinitive complement
    if prev in AUX_BE or prev in AUX_HAVE or prev in AUX_DO or prev in MODALS:
        return False  # belongs to a chain, handled there
    return True


def _consume_chain(tokens, idx, pos):
    """Consume modal/aux chain starting at idx[pos]; return (_VerbGroup, next_pos)."""
    chain: list[int] = []
    negs: list[int] = []
    advs: list[int] = []
    p = pos
    last_aux = None
    while p < len(idx):
        low = tokens[idx[p]].low
        if low in MODALS or low in AUX_BE or low in AUX_HAVE or low in AUX_DO:
            chain.append(idx[p])
            last_aux = low
            p += 1
        elif low in NEGATIONS:
            negs.append(idx[p])
            p += 1
        elif low in CHAIN_FILLERS:
            chain.append(idx[p])
            p += 1
        elif low in GROUP_ADVERBS:
            advs.append(idx[p])
            p += 1
        else:
            break
    if not chain:
        return None, pos
    if p < len(idx):
        low = tokens[idx[p]].low
        is_verbish = low in VERB_FORMS or re.search(r"(ed|en)$", low)
        if low.endswith("ing") and last_aux not in AUX_BE and low not in ("being",):
            is_verbish = low in VERB_FORMS and last_aux in AUX_BE
        if is_verbish:
            return _VerbGroup(head=idx[p], chain=chain, negs=negs, adverbs=advs), p + 1
    # copular/possessive head: the last aux itself is the head ("I'll be away")
    head = chain[-1]
    rest = [c for c in chain if c != head]
    if tokens[head].low == "to":  # dangling "to" — drop it, head is previous aux
        rest_chain = [c for c in chain if tokens[c].low != "to"]
        if not rest_chain:
            return None, pos
        head = rest_chain[-1]
        rest = rest_chain[:-1]
    return _VerbGroup(head=head, chain=rest, negs=negs, adverbs=advs), p


# ---------------------------------------------------------------- frames

def _chunk_text(sentence: str, tokens: list[Token], first: int, last: int) -> tuple[str, Span]:
    span = (tokens[first].start, tokens[last].end)
    return sentence[span[0]:span[1]], span


def _subject_range(tokens, clause, in_modifier, first_group_start) -> tuple[int, int] | None:
    """Token range [a, b] of the subject chunk before the first verb group."""
    pre = [i for i in clause if not in_modifier[i] and i < first_group_start]
    # drop leading parenthetical groups with no alphabetic token, and punctuation
    while pre:
        if tokens[pre[0]].low == "(":
            depth, j = 0, 0
            content_alpha = False
            for j, ti in enumerate(pre):
                if tokens[ti].low == "(":
                    depth += 1
                elif tokens[ti].low == ")":
                    depth -= 1
                    if depth == 0:
                        break
                elif any(c.isalpha() for c in tokens[ti].text):
                    content_alpha = True
            if depth == 0 and not content_alpha:
                pre = pre[j + 1:]
                continue
            break
        if _is_punct(tokens[pre[0]]):
            pre = pre[1:]
            continue
        break
    while pre and _is_punct(tokens[pre[-1]]):
        pre = pre[:-1]
    if not pre:
        return None
    return pre[0], pre[-1]


class FallbackSRL:
    """Deterministic rule-based semantic-role labeler."""

    def __init__(self, token_cap: int = 256) -> None:
        self.token_cap = token_cap
        self.name = f"fallback-srl-cap{token_cap}"

    def frames_for_sentence(self, sentence: str) -> list[SRLFrame]:
        tokens = tokenize_with_spans(sentence)
        if not tokens:
            return []
        mod_chunks = _find_modifier_chunks(tokens)
        in_modifier = [False] * len(tokens)
        for a, b, _ in mod_chunks:
            for i in range(a, b):
                in_modifier[i] = True
        frames: list[SRLFrame] = []
        for clause in _split_clauses(tokens, in_modifier):
            if len(clause) > self.token_cap:
                clause = clause[: self.token_cap]
            frames.extend(self._clause_frames(sentence, tokens, clause, in_modifier, mod_chunks))
        return frames

    def frames_batch(self, sentences: Sequence[str]) -> list[list[SRLFrame]]:
        return [self.frames_for_sentence(s) for s in sentences]

    def _clause_frames(self, sentence, tokens, clause, in_modifier, mod_chunks):
        groups = _find_verb_groups(tokens, clause, in_modifier)
        if not groups:
            return []
        clause_set = set(clause)
        clause_mods = [(a, b, r) for (a, b, r) in mod_chunks if a in clause_set]
        first_start = min(
            [groups[0].head] + groups[0].chain + groups[0].negs + groups[0].adverbs
        )
        subj = _subject_range(tokens, clause, in_modifier, first_start)
        frames = []
        for gi, group in enumerate(groups):
            args: list[Argument] = []
            # leading modifiers attach to every frame; later ones to the
            # nearest preceding verb's frame
            for a, b, role in clause_mods:
                if a < first_start:
                    attach = True
                else:
                    owner = max(
                        (g for g in groups if g.head < a),
                        key=lambda g: g.head,
                        default=None,
                    )
                    attach = owner is group
                if attach:
                    text, span = _chunk_text(sentence, tokens, a, b - 1)
                    args.append(Argument(role, text.strip(), span))
            if subj is not None:
                text, span = _chunk_text(sentence, tokens, subj[0], subj[1])
                args.append(Argument("ARG0" if gi == 0 else "ARG0", text, span))
            shared_chain = group.chain or (groups[0].chain if gi > 0 else [])
            shared_negs = group.negs or (groups[0].negs if gi > 0 else [])
            for ci in shared_chain:
                if tokens[ci].low in MODALS:
                    args.append(Argument("ARGM-MOD", tokens[ci].text,
                                         (tokens[ci].start, tokens[ci].end)))
                else:
                    args.append(Argument("ARGM-PRX", tokens[ci].text,
                                         (tokens[ci].start, tokens[ci].end)))
            for ni in shared_negs:
                args.append(Argument("ARGM-NEG", tokens[ni].text,
                                     (tokens[ni].start, tokens[ni].end)))
            for ai in group.adverbs:
                args.append(Argument("ARGM-TMP", tokens[ai].text,
                                     (tokens[ai].start, tokens[ai].end)))
            args.extend(self._post_verb_args(sentence, tokens, clause, in_modifier,
                                             groups, gi))
            head_tok = tokens[group.head]
            frames.append(
                SRLFrame(
                    verb=head_tok.text,
                    verb_span=(head_tok.start, head_tok.end),
                    arguments=tuple(sorted(args, key=lambda a: a.span)),
                )
            )
        return frames

    def _post_verb_args(self, sentence, tokens, clause, in_modifier, groups, gi):
        group = groups[gi]
        if gi + 1 < len(groups):
            nxt = groups[gi + 1]
            stop = min([nxt.head] + nxt.chain + nxt.negs + nxt.adverbs)
            # exclude the coordinator right before the next group
            limit = stop
            k = clause.index(limit) - 1 if limit in clause else None
            while k is not None and k >= 0 and tokens[clause[k]].low in ("and", "or", ","):
                limit = clause[k]
                k -= 1
        else:
            limit = clause[-1] + 1
        mat = [
            i for i in clause
            if group.head < i < limit and not in_modifier[i]
        ]
        while mat and _is_punct(tokens[mat[-1]]):
            mat = mat[:-1]
        if not mat:
            return []
        text, span = _chunk_text(sentence, tokens, mat[0], mat[-1])
        return [Argument("ARG1", text, span)]


def extract_frames(record, provider: SRLProvider | None = None) -> list[SRLFrame]:
    """Frames for one kept sentence."""
    if hasattr(record, "kept") and not record.kept:
        raise ValueError("extract_frames requires a kept (English) sentence")
    text = record.text if hasattr(record, "text") else str(record)
    provider = provider or FallbackSRL()
    (frames,) = provider.frames_batch([text])
    return frames
