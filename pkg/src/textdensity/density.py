"""Information density measures over token probability series.

All quantities are computed in nats; pass base="bits" to divide by
log(2) exactly. Two entropy estimators are provided and reports must
say which one produced a number: entropy_frequency uses within-document
relative frequencies, entropy_contextual averages -P*log(P) of the
conditional token probabilities over positions (normalized by length,
so documents of different sizes are comparable).
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .corpus import Corpus, Document
from .probability import NgramModel, TokenProbabilitySeries, token_probs

_log = logging.getLogger(__name__)

_LN2 = math.log(2.0)
_BASES = ("nats", "bits")


def _check_base(base: str) -> None:
    if base not in _BASES:
        raise ValueError(f"unknown log base {base!r}, expected one of {_BASES}")


def _convert(value, base: str):
    """nats -> requested base; bits are nats divided by log(2) exactly."""
    return value / _LN2 if base == "bits" else value


def surprisal(prob: float, base: str = "nats") -> float:
    """-log P. Zero for certain events, grows as events get rarer."""
    _check_base(base)
    if not (0.0 < prob <= 1.0) or not math.isfinite(prob):
        raise ValueError(f"probability must lie in (0, 1], got {prob}")
    return _convert(-math.log(prob), base)


def document_surprisal(
    series: TokenProbabilitySeries, base: str = "nats"
) -> tuple[np.ndarray, float]:
    """Per-token surprisal values and their mean."""
    _check_base(base)
    if len(series) == 0:
        raise ValueError(f"doc {series.doc_id!r}: empty series has no surprisal")
    values = _convert(-np.log(series.probs), base)
    return values, float(values.mean())


def entropy_frequency(doc: Document, base: str = "nats") -> float:
    """Entropy of the document's empirical token-type distribution:
    H = -sum over types of p*log(p), p = type frequency / token count."""
    _check_base(base)
    if not doc.tokens:
        raise ValueError(f"doc {doc.id!r}: no tokens to estimate entropy from")
    counts = Counter(doc.normalized_tokens)
    n = len(doc.tokens)
    h = -sum((c / n) * math.log(c / n) for c in counts.values())
    return _convert(h, base)


def entropy_contextual(series: TokenProbabilitySeries, base: str = "nats") -> float:
    """Length-normalized contextual estimate:
    H = -(1/n) * sum over positions of P(w_i)*log(P(w_i))."""
    _check_base(base)
    if len(series) == 0:
        raise ValueError(f"doc {series.doc_id!r}: empty series has no entropy")
    p = series.probs
    return _convert(float(-(p * np.log(p)).mean()), base)


@dataclass(frozen=True)
class UidConfig:
    """How surprisal uniformity is measured.

    distance: per-unit deviation from the reference rate, "squared" or
    "absolute". rate_source picks the reference: "corpus_mean" is the
    token-weighted mean surprisal over the whole corpus (resolved once,
    stored in mu_c), "document_mean" is each document's own mean. unit
    chooses between per-token surprisals and per-sentence means.
    """

    distance: str = "squared"
    rate_source: str = "corpus_mean"
    mu_c: float | None = None
    unit: str = "token"

    def __post_init__(self):
        if self.distance not in ("squared", "absolute"):
            raise ValueError(f"unknown distance {self.distance!r}")
        if self.rate_source not in ("corpus_mean", "document_mean"):
            raise ValueError(f"unknown rate_source {self.rate_source!r}")
        if self.unit not in ("token", "sentence"):
            raise ValueError(f"unknown unit {self.unit!r}")


def uid_deviation(surprisals, config: UidConfig) -> float:
    """Mean deviation of per-unit surprisal from the reference rate.

    Zero means perfectly uniform information flow; the reference rate
    mu_c must already be resolved in the config.
    """
    values = np.asarray(surprisals, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty surprisal series has no uniformity deviation")
    if config.mu_c is None:
        raise ValueError("UidConfig.mu_c is unresolved; resolve the reference rate first")
    delta = values - config.mu_c
    if config.distance == "squared":
        return float(np.mean(delta * delta))
    return float(np.mean(np.abs(delta)))


@dataclass
class DensityProfile:
    doc_id: str
    surprisal_series: np.ndarray
    mean_surprisal: float
    entropy_frequency: float
    entropy_contextual: float
    uid_deviation: float


@dataclass
class DensityError:
    doc_id: str
    message: str


ProbSource = Callable[[Document], TokenProbabilitySeries]


def _as_prob_source(source) -> ProbSource:
    if isinstance(source, NgramModel):
        return lambda doc: token_probs(source, doc)
    if isinstance(source, Mapping):
        def lookup(doc: Document) -> TokenProbabilitySeries:
            series = source.get(doc.id)
            if series is None:
                raise KeyError(f"no probability series for doc {doc.id!r}")
            return series
        return lookup
    if callable(source):
        return source
    raise TypeError(f"cannot use {type(source).__name__} as a probability source")


def _sentence_means(doc: Document, values: np.ndarray) -> np.ndarray:
    return np.array([values[a:b].mean() for a, b in doc.sentences], dtype=np.float64)


def corpus_density(
    corpus: Corpus,
    prob_source,
    uid: UidConfig | None = None,
    base: str = "nats",
) -> tuple[list[DensityProfile], list[DensityError]]:
    """Density profile for every document in the corpus.

    prob_source may be a trained NgramModel, a mapping doc_id -> series,
    or a callable doc -> series. Documents whose series is missing or
    invalid produce a DensityError entry instead of aborting the run.
    The corpus-mean reference rate is token-weighted: total surprisal
    over total token count, taken over the documents that scored.
    """
    _check_base(base)
    uid = uid or UidConfig()
    get_series = _as_prob_source(prob_source)

    scored: list[tuple[Document, TokenProbabilitySeries, np.ndarray, float]] = []
    errors: list[DensityError] = []
    for doc in corpus.documents:
        try:
            series = get_series(doc)
            values, mean = document_surprisal(series, base)
        except (KeyError, ValueError) as exc:
            errors.append(DensityError(doc_id=doc.id, message=str(exc)))
            _log.warning("density: skipping doc %r: %s", doc.id, exc)
            continue
        scored.append((doc, series, values, mean))

    if uid.rate_source == "corpus_mean" and uid.mu_c is None:
        total_tokens = sum(len(values) for _, _, values, _ in scored)
        if total_tokens:
            total = sum(float(values.sum()) for _, _, values, _ in scored)
            uid = replace(uid, mu_c=total / total_tokens)

    profiles = []
    for doc, series, values, mean in scored:
        units = _sentence_means(doc, values) if uid.unit == "sentence" else values
        doc_uid = replace(uid, mu_c=float(np.mean(units))) if uid.rate_source == "document_mean" else uid
        profiles.append(
            DensityProfile(
                doc_id=doc.id,
                surprisal_series=values,
                mean_surprisal=mean,
                entropy_frequency=entropy_frequency(doc, base),
                entropy_contextual=entropy_contextual(series, base),
                uid_deviation=uid_deviation(units, doc_uid),
            )
        )
    return profiles, errors
