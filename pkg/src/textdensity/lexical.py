"""Surface-level lexical measures: readability and vocabulary richness."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .corpus import Document

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


def count_syllables(word: str) -> int:
    """Heuristic syllable count for one word.

    Counts maximal vowel groups (a, e, i, o, u, y), then subtracts a
    trailing silent 'e'. The final 'e' is not silent after a vowel
    ("see") or in a consonant+"le" ending ("apple" keeps both groups).
    Words without vowels still count one syllable.
    """
    w = word.lower()
    groups = len(_VOWEL_GROUP_RE.findall(w))
    if (
        groups >= 2
        and w.endswith("e")
        and len(w) >= 2
        and w[-2] not in "aeiouy"
        and not w.endswith("le")
    ):
        groups -= 1
    return max(groups, 1)


def flesch_reading_ease(doc: Document) -> float:
    """206.835 - 1.015*(words/sentences) - 84.6*(syllables/words).

    Higher is easier to read; long sentences packed with polysyllabic
    tokens push the score negative.
    """
    words = len(doc.tokens)
    if words == 0:
        raise ValueError(f"doc {doc.id!r}: readability needs at least one token")
    sentences = len(doc.sentences)
    syllables = sum(count_syllables(t.normalized) for t in doc.tokens)
    return 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words)


def herdan_richness(doc: Document) -> float:
    """Herdan's C = log(types) / log(tokens) over normalized tokens.

    1.0 when every token is distinct, falling toward 0 as repetition
    grows. A single-token document is defined as 1.0 (log(1)/log(1) is
    indeterminate; one token is trivially all-distinct).
    """
    n = len(doc.tokens)
    if n == 0:
        raise ValueError(f"doc {doc.id!r}: richness needs at least one token")
    if n == 1:
        return 1.0
    v = len(set(doc.normalized_tokens))
    return math.log(v) / math.log(n)


@dataclass
class LexicalProfile:
    doc_id: str
    word_count: int
    sentence_count: int
    syllable_count: int
    flesch: float
    type_count: int
    herdan_c: float


def lexical_profile(doc: Document) -> LexicalProfile:
    if not doc.tokens:
        raise ValueError(f"doc {doc.id!r}: no tokens to profile")
    return LexicalProfile(
        doc_id=doc.id,
        word_count=len(doc.tokens),
        sentence_count=len(doc.sentences),
        syllable_count=sum(count_syllables(t.normalized) for t in doc.tokens),
        flesch=flesch_reading_ease(doc),
        type_count=len(set(doc.normalized_tokens)),
        herdan_c=herdan_richness(doc),
    )
