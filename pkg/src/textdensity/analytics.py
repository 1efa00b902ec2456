"""Corpus-level analytics: density estimates, variant comparison,
report emission and a synthetic corpus generator.

Reports are deterministic: the same inputs produce byte-identical CSV,
JSON and SVG files. Nothing here writes timestamps or machine state.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from . import __version__, charts, kernels
from .corpus import Corpus, Document, make_document
from .density import UidConfig, corpus_density
from .errors import ValidationError
from .lexical import lexical_profile
from .probability import train_ngram

_log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
COMPARISON_METRICS = (
    "mean_surprisal",
    "entropy_frequency",
    "uid_deviation",
    "flesch",
    "herdan_c",
)
BANDWIDTH_FLOOR = 1e-6


@dataclass
class KdeCurve:
    xs: np.ndarray
    ys: np.ndarray
    bandwidth: float
    sample_count: int


def silverman_bandwidth(samples: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * n^(-1/5), floored at 1e-6 so
    zero-variance samples still produce a (very sharp) curve."""
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.shape[0]
    if n == 0:
        raise ValueError("empty sample has no bandwidth")
    if n == 1:
        return BANDWIDTH_FLOOR
    sd = float(np.std(samples, ddof=1))
    q75, q25 = np.percentile(samples, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return max(0.9 * spread * n ** (-0.2), BANDWIDTH_FLOOR)


def kde_density(samples, xs, bandwidth: float) -> np.ndarray:
    """Gaussian kernel density evaluated at arbitrary points:
    f(x) = (1/(n*h)) * sum_i phi((x - x_i)/h)."""
    return kernels.gaussian_kde_sum(
        np.asarray(samples, dtype=np.float64), np.asarray(xs, dtype=np.float64), bandwidth
    )


def kde(samples, bandwidth: float | None = None, grid_size: int = 512) -> KdeCurve:
    """Density curve over an even grid spanning [min-3h, max+3h].

    The mass beyond three bandwidths of the extreme samples is tiny but
    not zero; integrate over a wider evaluation window (kde_integral
    uses five bandwidths) when checking normalization.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.shape[0] == 0:
        raise ValueError("kde needs a non-empty 1-d sample")
    if not np.all(np.isfinite(samples)):
        raise ValueError("kde samples must be finite")
    if grid_size < 2:
        raise ValueError(f"grid_size must be >= 2, got {grid_size}")
    if bandwidth is None:
        bandwidth = silverman_bandwidth(samples)
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    lo = float(samples.min()) - 3.0 * bandwidth
    hi = float(samples.max()) + 3.0 * bandwidth
    xs = np.linspace(lo, hi, grid_size)
    ys = kde_density(samples, xs, bandwidth)
    return KdeCurve(xs=xs, ys=ys, bandwidth=bandwidth, sample_count=samples.shape[0])


def kde_integral(samples, bandwidth: float, grid_size: int = 4096) -> float:
    """Trapezoidal integral of the density over [min-5h, max+5h]."""
    samples = np.asarray(samples, dtype=np.float64)
    lo = float(samples.min()) - 5.0 * bandwidth
    hi = float(samples.max()) + 5.0 * bandwidth
    xs = np.linspace(lo, hi, grid_size)
    ys = kde_density(samples, xs, bandwidth)
    return float(np.trapezoid(ys, xs))


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of the synthetic labeled corpus.

    Each label anchors docs_per_label documents; a document carries its
    anchor plus (labels_per_doc - 1) co-labels, and contains
    keyword_repeats occurrences of each of its labels' keyword tokens
    amid filler. redundancy is the fraction of the target length filled
    by re-copying contiguous spans of already-generated text, imitating
    copy-paste duplication.
    """

    labels: int = 10
    docs_per_label: int = 50
    labels_per_doc: int = 2
    keywords_per_label: int = 3
    keyword_repeats: int = 3
    filler_vocab: int = 100
    length_min: int = 40
    length_max: int = 80
    redundancy: float = 0.0
    train_frac: float = 0.7
    valid_frac: float = 0.1

    def __post_init__(self):
        if self.labels < 1 or self.docs_per_label < 1:
            raise ValueError("labels and docs_per_label must be >= 1")
        if not (1 <= self.labels_per_doc <= self.labels):
            raise ValueError("labels_per_doc must lie in [1, labels]")
        if self.keywords_per_label < 1 or self.keyword_repeats < 1:
            raise ValueError("keywords_per_label and keyword_repeats must be >= 1")
        if self.filler_vocab < 1:
            raise ValueError("filler_vocab must be >= 1")
        if not (1 <= self.length_min <= self.length_max):
            raise ValueError("need 1 <= length_min <= length_max")
        if not (0.0 <= self.redundancy < 1.0):
            raise ValueError(f"redundancy must lie in [0, 1), got {self.redundancy}")
        if not (0.0 < self.train_frac < 1.0) or self.valid_frac < 0.0:
            raise ValueError("invalid split fractions")
        if self.train_frac + self.valid_frac >= 1.0:
            raise ValueError("train_frac + valid_frac must leave room for a test split")
        keyword_budget = self.labels_per_doc * self.keywords_per_label * self.keyword_repeats
        base_min = max(1, int(round(self.length_min * (1.0 - self.redundancy))))
        if base_min < keyword_budget:
            raise ValueError(
                f"length_min {self.length_min} cannot hold "
                f"{keyword_budget} keyword occurrences at redundancy {self.redundancy}"
            )


def synthesize_corpus(spec: GeneratorSpec, seed: int = 0) -> Corpus:
    """Deterministic labeled corpus for end-to-end runs and tests."""
    rng = np.random.default_rng(seed)
    label_names = [f"L{j:02d}" for j in range(spec.labels)]
    keywords = {
        j: [f"key{j:02d}{chr(ord('a') + t)}" for t in range(spec.keywords_per_label)]
        for j in range(spec.labels)
    }
    fillers = [f"filler{i:03d}" for i in range(spec.filler_vocab)]

    documents = []
    doc_idx = 0
    for anchor in range(spec.labels):
        for _ in range(spec.docs_per_label):
            others = [j for j in range(spec.labels) if j != anchor]
            extra = (
                list(rng.choice(others, size=spec.labels_per_doc - 1, replace=False))
                if spec.labels_per_doc > 1
                else []
            )
            label_set = [anchor, *extra]

            target_len = int(rng.integers(spec.length_min, spec.length_max + 1))
            base_len = max(1, int(round(target_len * (1.0 - spec.redundancy))))
            content = []
            for j in label_set:
                for _ in range(spec.keyword_repeats):
                    content.extend(keywords[j])
            filler_count = max(0, base_len - len(content))
            content.extend(
                fillers[i] for i in rng.integers(0, spec.filler_vocab, size=filler_count)
            )
            rng.shuffle(content)

            while len(content) < target_len:
                span_len = int(rng.integers(5, 16))
                start = int(rng.integers(0, len(content)))
                content.extend(content[start : start + span_len])
            content = content[:target_len]

            words = []
            until_break = int(rng.integers(8, 15))
            for tok in content:
                words.append(tok)
                until_break -= 1
                if until_break == 0:
                    words[-1] = words[-1] + "."
                    until_break = int(rng.integers(8, 15))
            text = " ".join(words)
            documents.append(
                (f"doc{doc_idx:05d}", text, {label_names[j] for j in label_set})
            )
            doc_idx += 1

    order = rng.permutation(len(documents))
    n_train = int(round(spec.train_frac * len(documents)))
    n_valid = int(round(spec.valid_frac * len(documents)))
    split_of = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            split_of[idx] = "train"
        elif rank < n_train + n_valid:
            split_of[idx] = "valid"
        else:
            split_of[idx] = "test"

    docs = [
        make_document(doc_id, text, labels, split_of[i])
        for i, (doc_id, text, labels) in enumerate(documents)
    ]
    return Corpus.from_documents(docs)


@dataclass
class VariantReport:
    tag: str
    per_doc: dict[str, dict[str, float]]  # metric -> doc_id -> value
    means: dict[str, float]
    curves: dict[str, KdeCurve]


@dataclass
class CorpusComparison:
    variants: list[VariantReport]  # original first
    deltas: dict[str, dict[str, float]]  # tag -> metric -> variant mean - original mean
    doc_ids: list[str]
    config: dict


def _variant_metrics(
    tag: str, corpus: Corpus, doc_ids: list[str], model, uid: UidConfig, base: str
) -> VariantReport:
    wanted = set(doc_ids)
    profiles, errors = corpus_density(corpus, model, uid=uid, base=base)
    for err in errors:
        _log.warning("compare[%s]: %s: %s", tag, err.doc_id, err.message)
    density_by_id = {p.doc_id: p for p in profiles}

    per_doc: dict[str, dict[str, float]] = {metric: {} for metric in COMPARISON_METRICS}
    for doc in corpus.documents:
        if doc.id not in wanted:
            continue
        prof = density_by_id.get(doc.id)
        if prof is None or not doc.tokens:
            continue
        lex = lexical_profile(doc)
        per_doc["mean_surprisal"][doc.id] = prof.mean_surprisal
        per_doc["entropy_frequency"][doc.id] = prof.entropy_frequency
        per_doc["uid_deviation"][doc.id] = prof.uid_deviation
        per_doc["flesch"][doc.id] = lex.flesch
        per_doc["herdan_c"][doc.id] = lex.herdan_c

    means = {}
    curves = {}
    for metric in COMPARISON_METRICS:
        values = np.array(list(per_doc[metric].values()), dtype=np.float64)
        if values.size == 0:
            raise ValidationError(f"variant {tag!r} produced no values for {metric}")
        means[metric] = float(values.mean())
        curves[metric] = kde(values)
    return VariantReport(tag=tag, per_doc=per_doc, means=means, curves=curves)


def compare_corpora(
    original: Corpus,
    variants: list[tuple[str, Corpus]],
    uid: UidConfig | None = None,
    base: str = "nats",
    ngram_order: int = 3,
    smoothing_k: float = 0.1,
) -> CorpusComparison:
    """Per-document metrics and distribution curves for the original
    corpus and each reduced/rewritten variant of it.

    One n-gram model, fitted on the original corpus (train split when
    present, otherwise all documents), scores every variant, so
    surprisal differences reflect the texts and not the scorer. Only
    document ids present in all variants are compared.
    """
    uid = uid or UidConfig()
    tags = [tag for tag, _ in variants]
    if len(set(tags)) != len(tags) or "original" in tags:
        raise ValidationError("variant tags must be unique and not 'original'")

    scorer_corpus = original
    if not original.docs_in("train"):
        _log.info("compare: original corpus has no train split, fitting on all documents")
        retagged = [
            make_document(d.id, d.text, d.labels, "train") for d in original.documents
        ]
        scorer_corpus = Corpus.from_documents(retagged, original.min_token_freq)
    model = train_ngram(scorer_corpus, order=ngram_order, smoothing_k=smoothing_k)

    shared = {d.id for d in original.documents if d.tokens}
    for tag, corpus in variants:
        shared &= {d.id for d in corpus.documents if d.tokens}
    doc_ids = [d.id for d in original.documents if d.id in shared]
    dropped = len(original.documents) - len(doc_ids)
    if dropped:
        _log.info("compare: %d document(s) missing from some variant, comparing %d",
                  dropped, len(doc_ids))
    if not doc_ids:
        raise ValidationError("no shared non-empty documents to compare")

    reports = [_variant_metrics("original", original, doc_ids, model, uid, base)]
    for tag, corpus in variants:
        reports.append(_variant_metrics(tag, corpus, doc_ids, model, uid, base))

    deltas = {}
    base_means = reports[0].means
    for report in reports[1:]:
        deltas[report.tag] = {
            metric: report.means[metric] - base_means[metric]
            for metric in COMPARISON_METRICS
        }

    config = {
        "log_base": base,
        "uid": {"distance": uid.distance, "rate_source": uid.rate_source, "unit": uid.unit},
        "ngram_order": ngram_order,
        "smoothing_k": smoothing_k,
        "entropy_estimator": "frequency",
    }
    return CorpusComparison(variants=reports, deltas=deltas, doc_ids=doc_ids, config=config)


def emit_report(comparison: CorpusComparison, out_dir, extra_config: dict | None = None) -> list[str]:
    """Write metrics.csv, summary.json and one KDE SVG per metric.

    Returns the list of files written. A failure part-way removes the
    files already written in this call before re-raising.
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    try:
        csv_path = os.path.join(out_dir, "metrics.csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["doc_id", "variant", "metric", "value"])
            for doc_id in comparison.doc_ids:
                for report in comparison.variants:
                    for metric in COMPARISON_METRICS:
                        writer.writerow(
                            [doc_id, report.tag, metric, repr(report.per_doc[metric][doc_id])]
                        )
        written.append(csv_path)

        summary = {
            "schema_version": SCHEMA_VERSION,
            "toolkit_version": __version__,
            "document_count": len(comparison.doc_ids),
            "variants": {
                report.tag: {"means": report.means} for report in comparison.variants
            },
            "deltas": comparison.deltas,
            "config": {**comparison.config, **(extra_config or {})},
        }
        json_path = os.path.join(out_dir, "summary.json")
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(json_path)

        for metric in COMPARISON_METRICS:
            series = [
                (report.tag, report.curves[metric].xs.tolist(), report.curves[metric].ys.tolist())
                for report in comparison.variants
            ]
            svg = charts.line_chart(
                series,
                title=f"{metric} density",
                x_label=metric,
                y_label="density",
            )
            svg_path = os.path.join(out_dir, f"kde_{metric}.svg")
            with open(svg_path, "w", encoding="utf-8") as fh:
                fh.write(svg)
            written.append(svg_path)
    except Exception:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    return written
