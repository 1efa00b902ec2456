"""Content-word selection from pooled attention scores.

A document keeps the tokens whose pooled attention clears a threshold.
The threshold comes from one of three places: a fixed value, a
per-document quantile of the pooled scores, or a corpus-level
calibration that searches for the threshold whose mean reduced length
is closest to a target. Selection never empties a document: when
nothing clears the bar, the single best-scoring token survives.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass

import numpy as np

from .attention import AttentionModel, AttentionScores, attention_scores, _forward
from .corpus import Corpus, Document, make_document

_log = logging.getLogger(__name__)

# Logged when selection drops them; dropping negations can flip the
# meaning of the surrounding clause, so reduced corpora should be read
# with that caveat in mind.
NEGATION_TOKENS = frozenset({"not", "no", "never", "without"})


@dataclass(frozen=True)
class SelectionCriteria:
    """Exactly one mode is active: quantile (default) or fixed."""

    mode: str = "quantile"
    quantile: float = 0.875
    threshold: float | None = None

    def __post_init__(self):
        if self.mode == "quantile":
            if self.threshold is not None:
                raise ValueError("quantile mode does not take a fixed threshold")
            if not (0.0 < self.quantile < 1.0):
                raise ValueError(f"quantile must lie in (0, 1), got {self.quantile}")
        elif self.mode == "fixed":
            if self.threshold is None:
                raise ValueError("fixed mode needs a threshold")
        else:
            raise ValueError(f"unknown selection mode {self.mode!r}")


@dataclass
class SelectionResult:
    doc_id: str
    selected_indices: list[int]
    threshold: float
    reduced_doc: Document
    removed_negations: list[str]


def quantile_threshold(pooled: np.ndarray, q: float) -> float:
    """Nearest-rank quantile: the ceil(q*n)-th smallest pooled score."""
    n = pooled.shape[0]
    rank = max(1, math.ceil(q * n))
    return float(np.sort(pooled)[rank - 1])


def select_words(scores: AttentionScores, criteria: SelectionCriteria, doc: Document) -> SelectionResult:
    """Keep the tokens at or above the resolved threshold, in original
    order. Ties at the threshold are all kept. An empty selection falls
    back to the highest-scoring token (first occurrence on ties)."""
    if doc.id != scores.doc_id:
        raise ValueError(f"scores for doc {scores.doc_id!r} applied to doc {doc.id!r}")
    pooled = np.asarray(scores.pooled, dtype=np.float64)
    if pooled.shape[0] != len(doc.tokens):
        raise ValueError(
            f"doc {doc.id!r}: {pooled.shape[0]} pooled scores for {len(doc.tokens)} tokens"
        )
    if pooled.shape[0] == 0:
        raise ValueError(f"doc {doc.id!r}: nothing to select from an empty document")

    if criteria.mode == "fixed":
        threshold = float(criteria.threshold)
    else:
        threshold = quantile_threshold(pooled, criteria.quantile)

    selected = [i for i in range(pooled.shape[0]) if pooled[i] >= threshold]
    if not selected:
        selected = [int(np.argmax(pooled))]

    kept = set(selected)
    removed_negations = [
        doc.tokens[i].normalized
        for i in range(len(doc.tokens))
        if i not in kept and doc.tokens[i].normalized in NEGATION_TOKENS
    ]
    if removed_negations:
        _log.info(
            "selection: doc %r drops negation token(s): %s",
            doc.id,
            ", ".join(sorted(set(removed_negations))),
        )

    reduced_text = " ".join(doc.tokens[i].surface for i in selected)
    reduced_doc = make_document(doc.id, reduced_text, doc.labels, doc.split)
    return SelectionResult(
        doc_id=doc.id,
        selected_indices=selected,
        threshold=threshold,
        reduced_doc=reduced_doc,
        removed_negations=removed_negations,
    )


def calibrate_threshold(pooled_scores: list[np.ndarray], target_avg_length: float) -> float:
    """Global threshold whose corpus mean reduced length is closest to
    the target.

    Candidates are the pooled score values themselves; mean reduced
    length is non-increasing in the threshold, so a binary search over
    the sorted candidate multiset brackets the target and the closer
    neighbor wins. Exact ties prefer the larger threshold (the shorter
    reduction).
    """
    if not pooled_scores:
        raise ValueError("no documents to calibrate on")
    if target_avg_length < 1:
        raise ValueError(f"target_avg_length must be >= 1, got {target_avg_length}")
    per_doc_sorted = [np.sort(np.asarray(p, dtype=np.float64)) for p in pooled_scores]
    for p in per_doc_sorted:
        if p.shape[0] == 0:
            raise ValueError("cannot calibrate over an empty document")
    candidates = np.unique(np.concatenate(per_doc_sorted))

    def mean_length(threshold: float) -> float:
        total = 0
        for p in per_doc_sorted:
            # tokens with score >= threshold; empty selections keep one
            kept = p.shape[0] - bisect.bisect_left(p, threshold)
            total += max(kept, 1)
        return total / len(per_doc_sorted)

    # mean_length is non-increasing in the threshold: find the largest
    # candidate still at or above the target length, then compare with
    # the next one up.
    lo, hi = 0, candidates.shape[0] - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mean_length(float(candidates[mid])) >= target_avg_length:
            lo = mid
        else:
            hi = mid - 1
    best = float(candidates[lo])
    best_gap = abs(mean_length(best) - target_avg_length)
    if lo + 1 < candidates.shape[0]:
        above = float(candidates[lo + 1])
        gap = abs(mean_length(above) - target_avg_length)
        if gap <= best_gap:
            best, best_gap = above, gap
    return best


def reduce_corpus(
    corpus: Corpus,
    model: AttentionModel,
    criteria: SelectionCriteria | None = None,
    target_avg_length: float | None = None,
) -> tuple[Corpus, list[SelectionResult]]:
    """Apply selection to every document and rebuild the corpus.

    With target_avg_length set, a global threshold is calibrated first
    and used as a fixed criterion for all documents. Documents that
    cannot be scored pass through unreduced with a warning.
    """
    criteria = criteria or SelectionCriteria()
    scorable: dict[str, AttentionScores] = {}
    for doc in corpus.documents:
        if doc.tokens:
            scorable[doc.id] = attention_scores(model, doc)

    if target_avg_length is not None:
        threshold = calibrate_threshold(
            [scorable[d.id].pooled for d in corpus.documents if d.id in scorable],
            target_avg_length,
        )
        criteria = SelectionCriteria(mode="fixed", threshold=threshold)

    reduced_docs = []
    results = []
    for doc in corpus.documents:
        scores = scorable.get(doc.id)
        if scores is None:
            _log.warning("selection: doc %r is empty, passing through unreduced", doc.id)
            reduced_docs.append(doc)
            continue
        result = select_words(scores, criteria, doc)
        results.append(result)
        reduced_docs.append(result.reduced_doc)
    return Corpus.from_documents(reduced_docs, min_token_freq=corpus.min_token_freq), results


def scaled_predict(
    model: AttentionModel,
    doc: Document,
    selection: SelectionResult,
    factor: float,
    target: str = "selected",
) -> np.ndarray:
    """Predict with the embeddings of the targeted positions multiplied
    by factor before feature extraction. target is "selected" or
    "non_selected". factor=1 reproduces predict() bit for bit."""
    if factor < 0:
        raise ValueError(f"factor must be >= 0, got {factor}")
    if target not in ("selected", "non_selected"):
        raise ValueError(f"unknown scaling target {target!r}")
    if selection.doc_id != doc.id:
        raise ValueError(
            f"selection for doc {selection.doc_id!r} applied to doc {doc.id!r}"
        )
    if not doc.tokens:
        raise ValueError(f"doc {doc.id!r}: cannot score an empty document")
    n = len(doc.tokens)
    if any(i < 0 or i >= n for i in selection.selected_indices):
        raise ValueError(f"doc {doc.id!r}: selection indices out of range")
    x = model.embedding[model.token_ids(doc)].copy()
    mask = np.zeros(n, dtype=bool)
    mask[selection.selected_indices] = True
    if target == "non_selected":
        mask = ~mask
    x[mask] *= factor
    _, _, scores = _forward(model, x)
    return scores
