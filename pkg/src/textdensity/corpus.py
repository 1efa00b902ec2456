"""Document ingestion: tokenization, sentence splitting, vocabularies.

A corpus is a list of documents in JSONL form, one object per line with
fields ``id``, ``text``, ``labels`` and ``split``. Tokenization and
sentence splitting are deterministic pure functions of the raw text, so
a corpus saved and reloaded reproduces the exact same token sequences
and vocabularies.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import DuplicateDocumentError, ParseError, ValidationError

SPLITS = ("train", "valid", "test")
UNKNOWN_TOKEN = "<unk>"

# Tokens are maximal runs of Unicode letters, digits and apostrophes.
# [^\W_] is the letter-or-digit class (\w minus the underscore).
_TOKEN_RE = re.compile(r"(?:[^\W_]|')+")

_TERMINATORS = frozenset(".!?")

# Trailing periods of these abbreviations do not end a sentence. The
# dotted entries suppress their inner periods as well, so "e.g." never
# splits between "e" and "g".
ABBREVIATIONS = frozenset({"dr", "mr", "mrs", "ms", "vs", "e.g", "i.e", "etc"})

_ABBREV_RES = [
    re.compile(r"(?<!\w)" + re.escape(a) + r"\.", re.IGNORECASE) for a in sorted(ABBREVIATIONS)
]


@dataclass(frozen=True)
class Token:
    """One token: raw surface, lowercased form, and its UTF-8 byte span."""

    surface: str
    normalized: str
    byte_span: tuple[int, int]


@dataclass
class Document:
    id: str
    text: str
    tokens: list[Token]
    sentences: list[tuple[int, int]]  # half-open token-index ranges
    labels: set[str]
    split: str

    @property
    def normalized_tokens(self) -> list[str]:
        return [t.normalized for t in self.tokens]


def tokenize(text: str) -> list[Token]:
    """Split raw text into tokens.

    Byte spans index into the UTF-8 encoding of ``text`` and round-trip:
    ``text.encode()[start:end].decode() == surface``.
    """
    tokens = []
    byte_pos = 0
    char_pos = 0
    for m in _TOKEN_RE.finditer(text):
        byte_start = byte_pos + len(text[char_pos : m.start()].encode("utf-8"))
        surface = m.group()
        byte_end = byte_start + len(surface.encode("utf-8"))
        tokens.append(Token(surface, surface.lower(), (byte_start, byte_end)))
        byte_pos = byte_end
        char_pos = m.end()
    return tokens


def _suppressed_periods(text: str) -> set[int]:
    """Character positions of '.' that belong to a known abbreviation."""
    out: set[int] = set()
    for pattern in _ABBREV_RES:
        for m in pattern.finditer(text):
            for pos in range(m.start(), m.end()):
                if text[pos] == ".":
                    out.add(pos)
    return out


def _sentence_ranges(text: str, tokens: list[Token]) -> list[tuple[int, int]]:
    if not tokens:
        return []
    spans = [(m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]
    suppressed = _suppressed_periods(text)
    ranges = []
    start = 0
    for i in range(len(tokens)):
        gap_start = spans[i][1]
        gap_end = spans[i + 1][0] if i + 1 < len(tokens) else len(text)
        ends_here = False
        for pos in range(gap_start, gap_end):
            ch = text[pos]
            if ch in _TERMINATORS and (ch != "." or pos not in suppressed):
                ends_here = True
                break
        if ends_here and i + 1 < len(tokens):
            ranges.append((start, i + 1))
            start = i + 1
    ranges.append((start, len(tokens)))
    return ranges


def split_sentences(doc: Document) -> list[tuple[int, int]]:
    """Half-open token-index ranges partitioning ``doc.tokens``.

    A sentence ends after a token whose trailing raw text contains '.',
    '!' or '?', unless the period closes a known abbreviation. Text with
    no terminator is a single sentence.
    """
    return _sentence_ranges(doc.text, doc.tokens)


def make_document(doc_id: str, text: str, labels=(), split: str = "train") -> Document:
    if split not in SPLITS:
        raise ValidationError(f"unknown split {split!r}, expected one of {SPLITS}")
    tokens = tokenize(text)
    return Document(
        id=doc_id,
        text=text,
        tokens=tokens,
        sentences=_sentence_ranges(text, tokens),
        labels=set(labels),
        split=split,
    )


@dataclass
class Corpus:
    documents: list[Document]
    label_vocab: list[str]
    # (token, frequency) pairs; train-split types in first-occurrence
    # order, then one <unk> entry absorbing everything else. Frequencies
    # count occurrences over all splits, so they sum to the total token
    # count of the corpus.
    token_vocab: list[tuple[str, int]]
    min_token_freq: int = 1
    _token_index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_documents(cls, documents: list[Document], min_token_freq: int = 1) -> Corpus:
        seen_ids = set()
        for doc in documents:
            if doc.id in seen_ids:
                raise DuplicateDocumentError(f"duplicate document id {doc.id!r}")
            seen_ids.add(doc.id)

        train_counts: Counter[str] = Counter()
        for doc in documents:
            if doc.split == "train":
                train_counts.update(doc.normalized_tokens)

        types = []
        kept = set()
        for doc in documents:
            if doc.split != "train":
                continue
            for tok in doc.normalized_tokens:
                if tok not in kept and train_counts[tok] >= min_token_freq:
                    kept.add(tok)
                    types.append(tok)

        all_counts: Counter[str] = Counter()
        total = 0
        for doc in documents:
            all_counts.update(doc.normalized_tokens)
            total += len(doc.tokens)

        token_vocab = [(t, all_counts[t]) for t in types]
        if documents:
            unk_count = total - sum(c for _, c in token_vocab)
            token_vocab.append((UNKNOWN_TOKEN, unk_count))

        label_vocab = sorted({label for doc in documents for label in doc.labels})
        corpus = cls(
            documents=documents,
            label_vocab=label_vocab,
            token_vocab=token_vocab,
            min_token_freq=min_token_freq,
        )
        corpus._token_index = {t: i for i, (t, _) in enumerate(token_vocab)}
        return corpus

    @property
    def type_tokens(self) -> list[str]:
        """Vocabulary types excluding the <unk> entry."""
        if not self.token_vocab:
            return []
        return [t for t, _ in self.token_vocab[:-1]]

    def token_index(self, token: str) -> int:
        """Row index for a normalized token; unknown tokens share the last row."""
        return self._token_index.get(token, len(self.token_vocab) - 1)

    def docs_in(self, split: str) -> list[Document]:
        if split not in SPLITS:
            raise ValidationError(f"unknown split {split!r}, expected one of {SPLITS}")
        return [d for d in self.documents if d.split == split]

    def document_by_id(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)


def load_corpus(path, format: str = "jsonl", min_token_freq: int = 1) -> Corpus:
    """Load and validate a corpus file.

    Raises ParseError with the offending line number for undecodable
    records, ValidationError for schema violations (unknown split, empty
    text), and DuplicateDocumentError for repeated ids.
    """
    if format != "jsonl":
        raise ValidationError(f"unsupported corpus format {format!r}")
    documents = []
    seen_ids: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(record, dict):
                raise ParseError("record is not an object", line=lineno)
            doc_id = record.get("id")
            text = record.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise ParseError("missing or invalid 'id'", line=lineno)
            if not isinstance(text, str):
                raise ParseError("missing or invalid 'text'", line=lineno)
            if not text.strip():
                raise ValidationError(f"line {lineno}: document {doc_id!r} has empty text")
            labels = record.get("labels", [])
            if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
                raise ParseError("'labels' must be a list of strings", line=lineno)
            split = record.get("split", "train")
            if split not in SPLITS:
                raise ValidationError(
                    f"line {lineno}: unknown split {split!r}, expected one of {SPLITS}"
                )
            if doc_id in seen_ids:
                raise DuplicateDocumentError(
                    f"line {lineno}: duplicate document id {doc_id!r} "
                    f"(first seen at line {seen_ids[doc_id]})"
                )
            seen_ids[doc_id] = lineno
            documents.append(make_document(doc_id, text, labels, split))
    return Corpus.from_documents(documents, min_token_freq=min_token_freq)


def save_corpus(corpus: Corpus, path) -> None:
    """Write the corpus back to JSONL. Reloading reproduces it exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            record = {
                "id": doc.id,
                "text": doc.text,
                "labels": sorted(doc.labels),
                "split": doc.split,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
