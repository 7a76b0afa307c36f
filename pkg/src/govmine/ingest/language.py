"""Language gating for sentences.

Classification is provider-pluggable.  The built-in fallback keeps a
sentence when enough of its tokens look like ASCII words and English
stop-words appear at the expected density; code fragments and
stack traces fail the word-ratio test, non-English prose fails the
stop-word test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .types import SentenceRecord

ENGLISH_STOPWORDS = frozenset(
    """a an and are as at be been but by can could did do does for from had has
    have he her his i if in into is it its may might must my not of on or our
    she should so than that the their them then there these they this to was
    we were what when where which while who will with would you your""".split()
)

# small per-language stop-word sets for the heuristic identifier
_STOPWORDS_BY_LANG = {
    "en": ENGLISH_STOPWORDS,
    "fr": frozenset(
        "le la les un une des du de et est sont pour dans que qui ne pas au aux "
        "ce cette vous nous ils elles tout bonjour monde avec sur".split()
    ),
    "de": frozenset(
        "der die das ein eine und ist sind nicht mit von zu im für auf den dem "
        "wir ihr sie es auch aber oder wenn".split()
    ),
    "es": frozenset(
        "el la los las un una y es son no con de del para en que por se lo "
        "nosotros usted pero como más".split()
    ),
    "it": frozenset(
        "il lo la i gli le un una e è sono non con di del per in che si "
        "noi voi ma come più questo".split()
    ),
    "pt": frozenset(
        "o a os as um uma e é são não com de do da para em que se "
        "nós você mas como mais este".split()
    ),
}


class LangIdProvider(Protocol):
    name: str

    def identify_batch(self, texts: Sequence[str]) -> list[str]: ...


@dataclass
class HeuristicLangId:
    """Stop-word-overlap identifier with an ASCII word-ratio gate."""

    min_word_ratio: float = 0.6
    stopword_window: int = 8
    name: str = "heuristic-langid"

    def identify_one(self, text: str) -> str:
        if not text.strip():
            raise ValueError("cannot classify empty text")
        tokens = text.split()
        wordlike = [t.strip(".,;:!?()[]\"'").lower() for t in tokens]
        alpha = [t for t in wordlike if t.isalpha() and t.isascii()]
        if len(alpha) / len(tokens) < self.min_word_ratio:
            return "und"
        best_lang, best_hits = "und", 0
        for lang, stops in _STOPWORDS_BY_LANG.items():
            hits = sum(1 for t in wordlike if t in stops)
            if hits > best_hits:
                best_lang, best_hits = lang, hits
        if best_lang == "en":
            needed = max(1, math.ceil(len(tokens) / self.stopword_window))
            en_hits = sum(1 for t in wordlike if t in ENGLISH_STOPWORDS)
            if en_hits < needed:
                return "und"
        return best_lang

    def identify_batch(self, texts: Sequence[str]) -> list[str]:
        return [self.identify_one(t) for t in texts]


def classify_language(
    record: SentenceRecord, provider: LangIdProvider | None = None
) -> SentenceRecord:
    """Set language and the kept flag (kept iff classified English)."""
    provider = provider or HeuristicLangId()
    (lang,) = provider.identify_batch([record.text])
    record.language = lang
    record.kept = lang == "en"
    return record
