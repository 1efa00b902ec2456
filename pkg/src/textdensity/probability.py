"""Conditional token probabilities.

Two sources produce the same series type: an add-k smoothed n-gram model
trained on the corpus train split, and external per-token sidecar files
for scores computed elsewhere. Everything downstream (surprisal, entropy,
uniformity) consumes a TokenProbabilitySeries and does not care which
source produced it.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import UNKNOWN_TOKEN, Corpus, Document
from .errors import AlignmentError, ParseError, TrainingError, ValidationError

BOS = "<s>"
EOS = "</s>"


@dataclass
class TokenProbabilitySeries:
    """Per-token conditional probabilities, aligned with the document's
    normalized tokens. Construction validates that every probability is
    finite and in (0, 1]."""

    doc_id: str
    tokens: list[str]
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 1 or len(self.tokens) != self.probs.shape[0]:
            raise ValueError(
                f"doc {self.doc_id!r}: {len(self.tokens)} tokens but "
                f"{self.probs.shape[0]} probabilities"
            )
        if self.probs.size:
            if not np.all(np.isfinite(self.probs)):
                raise ValueError(f"doc {self.doc_id!r}: non-finite probability")
            if self.probs.min() <= 0.0 or self.probs.max() > 1.0:
                raise ValueError(
                    f"doc {self.doc_id!r}: probabilities must lie in (0, 1]; "
                    "an unsmoothed model assigns zero to unseen events, "
                    "use smoothing_k > 0"
                )

    def __len__(self) -> int:
        return self.probs.shape[0]


@dataclass
class NgramModel:
    """Add-k smoothed n-gram model over normalized tokens.

    Sentences are padded with (order-1) begin markers and one end marker,
    so conditional distributions over {vocabulary, end marker} sum to
    one for every observed context. A unigram model (order 1) carries no
    markers at all: its probabilities are plain count ratios among real
    tokens.
    """

    order: int
    smoothing_k: float
    counts: dict[int, dict[tuple[str, ...], int]]
    types: list[str]
    _known: set[str] = field(default_factory=set, compare=False, repr=False)

    def __post_init__(self):
        # Markers are never out-of-vocabulary: the end marker is a real
        # outcome of every conditional distribution and must not collapse
        # onto the unknown row when queried.
        self._known = set(self.types) | {BOS, EOS}

    @property
    def vocab_size(self) -> int:
        """Smoothing denominator size: types plus unknown plus end marker."""
        return len(self.types) + 2

    def vocabulary(self) -> list[str]:
        """All vocab_size outcomes a conditional distribution ranges over."""
        return [*self.types, UNKNOWN_TOKEN, EOS]

    def map_token(self, token: str) -> str:
        return token if token in self._known else UNKNOWN_TOKEN

    def prob(self, token: str, context: tuple[str, ...] = ()) -> float:
        """P(token | context) with add-k smoothing.

        The context must hold exactly order-1 entries (already padded and
        vocabulary-mapped by the caller; token_probs does this). With
        smoothing_k == 0 an unseen event yields 0.0.
        """
        if len(context) != self.order - 1:
            raise ValueError(
                f"context length {len(context)} does not match order {self.order}"
            )
        k = self.smoothing_k
        word = self.map_token(token)
        if self.order == 1:
            num = self.counts[1].get((word,), 0)
            den = self._total_unigrams
        else:
            num = self.counts[self.order].get(context + (word,), 0)
            den = self.counts[self.order - 1].get(context, 0)
        denominator = den + k * self.vocab_size
        if denominator == 0.0:
            return 0.0
        return (num + k) / denominator

    @property
    def _total_unigrams(self) -> int:
        return sum(self.counts[1].values())

    def observed_contexts(self) -> list[tuple[str, ...]]:
        """Contexts usable as prob() queries, for diagnostics and tests."""
        if self.order == 1:
            return [()]
        return [c for c in self.counts[self.order - 1] if EOS not in c]


def train_ngram(corpus: Corpus, order: int = 3, smoothing_k: float = 0.1) -> NgramModel:
    """Count n-grams of the train split and return the smoothed model.

    Identical corpus and parameters yield identical count tables.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if smoothing_k < 0:
        raise ValueError(f"smoothing_k must be >= 0, got {smoothing_k}")
    train_docs = corpus.docs_in("train")
    if not train_docs:
        raise TrainingError("corpus has no train split to fit an n-gram model on")

    types = corpus.type_tokens
    known = set(types)
    counts: dict[int, dict[tuple[str, ...], int]] = {r: {} for r in range(1, order + 1)}
    for doc in train_docs:
        for a, b in doc.sentences:
            seq = [
                t.normalized if t.normalized in known else UNKNOWN_TOKEN
                for t in doc.tokens[a:b]
            ]
            if order == 1:
                padded = seq
            else:
                padded = [BOS] * (order - 1) + seq + [EOS]
            for r in range(1, order + 1):
                table = counts[r]
                for i in range(len(padded) - r + 1):
                    gram = tuple(padded[i : i + r])
                    table[gram] = table.get(gram, 0) + 1
    return NgramModel(order=order, smoothing_k=smoothing_k, counts=counts, types=types)


def token_probs(model: NgramModel, doc: Document) -> TokenProbabilitySeries:
    """Score every token of the document under the model.

    Contexts reset at sentence boundaries and are padded with begin
    markers, mirroring training. Out-of-vocabulary tokens are scored as
    the unknown token but reported under their own normalized surface.
    """
    probs = []
    order = model.order
    for a, b in doc.sentences:
        mapped = [model.map_token(t.normalized) for t in doc.tokens[a:b]]
        for i, word in enumerate(mapped):
            if order == 1:
                context: tuple[str, ...] = ()
            else:
                prefix = mapped[max(0, i - (order - 1)) : i]
                context = tuple([BOS] * (order - 1 - len(prefix)) + prefix)
            probs.append(model.prob(word, context))
    return TokenProbabilitySeries(
        doc_id=doc.id,
        tokens=[t.normalized for t in doc.tokens],
        probs=np.array(probs, dtype=np.float64),
    )


def sequence_log_prob(series: TokenProbabilitySeries) -> float:
    """Natural log probability of the token sequence: sum of log probs.

    Equals the log of the conditional chain product by construction.
    """
    if len(series) == 0:
        raise ValueError(f"doc {series.doc_id!r}: empty series has no sequence probability")
    return float(np.log(series.probs).sum())


def load_external_probs(path, corpus: Corpus) -> dict[str, TokenProbabilitySeries]:
    """Load sidecar probabilities, one JSONL record per document with
    fields doc_id, tokens, probs.

    Every record is validated against the toolkit's own tokenization of
    the referenced document; any token mismatch is an AlignmentError
    naming the document and the first offending index.
    """
    result: dict[str, TokenProbabilitySeries] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            doc_id = record.get("doc_id")
            tokens = record.get("tokens")
            probs = record.get("probs")
            if not isinstance(doc_id, str) or not isinstance(tokens, list) or not isinstance(probs, list):
                raise ParseError("record needs doc_id, tokens and probs", line=lineno)
            if doc_id in result:
                raise ValidationError(f"line {lineno}: duplicate sidecar entry for doc {doc_id!r}")
            try:
                doc = corpus.document_by_id(doc_id)
            except KeyError:
                raise ValidationError(
                    f"line {lineno}: sidecar references unknown doc {doc_id!r}"
                ) from None
            expected = [t.normalized for t in doc.tokens]
            for i, (got, want) in enumerate(zip(tokens, expected)):
                if got != want:
                    raise AlignmentError(
                        f"sidecar token {got!r} does not match corpus token {want!r}",
                        doc_id=doc_id,
                        index=i,
                    )
            if len(tokens) != len(expected):
                raise AlignmentError(
                    f"sidecar has {len(tokens)} tokens, corpus has {len(expected)}",
                    doc_id=doc_id,
                    index=min(len(tokens), len(expected)),
                )
            try:
                series = TokenProbabilitySeries(
                    doc_id=doc_id, tokens=list(tokens), probs=np.array(probs, dtype=np.float64)
                )
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: {exc}") from exc
            result[doc_id] = series
    return result
