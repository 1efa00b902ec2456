"""Command-line front end wiring the toolkit into reproducible pipelines.

One binary, nine subcommands (ingest, synth, train, evaluate, select,
density, lexical, compare, scale-ablation), all shell-composable.
Every flag can also be supplied through a JSON config file; explicit
flags win over config values, which win over built-in defaults. All
data goes to files or stdout, logs go to stderr, and any failure exits
nonzero with a single ``error: <category>: <message>`` line.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, charts
from .analytics import (
    SCHEMA_VERSION,
    GeneratorSpec,
    compare_corpora,
    emit_report,
    kde,
    synthesize_corpus,
)
from .attention import TrainConfig, evaluate, load_model, save_model, train
from .corpus import Corpus, load_corpus, make_document, save_corpus
from .density import UidConfig, corpus_density
from .errors import (
    AlignmentError,
    DuplicateDocumentError,
    ParseError,
    ToolkitError,
    TrainingError,
    ValidationError,
)
from .lexical import lexical_profile
from .probability import load_external_probs, train_ngram
from .selection import SelectionCriteria, SelectionResult, reduce_corpus, scaled_predict

DENSITY_METRICS = (
    "mean_surprisal",
    "entropy_frequency",
    "entropy_contextual",
    "uid_deviation",
)
LEXICAL_METRICS = (
    "word_count",
    "sentence_count",
    "syllable_count",
    "flesch",
    "type_count",
    "herdan_c",
)
# Only the continuous readability metrics get density curves; the raw
# counts stay in metrics.csv.
LEXICAL_CURVE_METRICS = ("flesch", "herdan_c")


class UsageError(Exception):
    """Bad invocation: unknown flag, missing input, malformed value."""


class _Parser(argparse.ArgumentParser):
    # argparse prints a two-line usage blurb and exits; route through
    # the single-line error contract instead.
    def error(self, message):
        raise UsageError(message)


_ERROR_CATEGORIES: tuple[tuple[type, str], ...] = (
    (ParseError, "parse"),
    (AlignmentError, "alignment"),
    (DuplicateDocumentError, "duplicate"),
    (TrainingError, "training"),
    (ValidationError, "validation"),
    (ToolkitError, "toolkit"),
    (FileNotFoundError, "io"),
    (OSError, "io"),
    (ValueError, "validation"),
    (KeyError, "validation"),
)


def _category(exc: BaseException) -> str:
    for kind, name in _ERROR_CATEGORIES:
        if isinstance(exc, kind):
            return name
    return "internal"


def _fail(exc: BaseException) -> int:
    message = str(exc) or exc.__class__.__name__
    print(f"error: {_category(exc)}: {message}", file=sys.stderr)
    return 1


def _note(message: str) -> None:
    print(f"note: {message}", file=sys.stderr)


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# config resolution

_DEFAULTS: dict[str, dict] = {
    "ingest": {"out": None, "min_token_freq": 1},
    "synth": {
        "out": None,
        "labels": 10,
        "docs_per_label": 50,
        "labels_per_doc": 2,
        "keywords_per_label": 3,
        "keyword_repeats": 3,
        "filler_vocab": 100,
        "length_min": 40,
        "length_max": 80,
        "redundancy": 0.0,
        "train_frac": 0.7,
        "valid_frac": 0.1,
        "seed": 0,
    },
    "train": {
        "corpus": None,
        "out": None,
        "min_token_freq": 1,
        "d_h": 64,
        "window": 3,
        "learning_rate": 0.05,
        "epochs": 20,
        "batch_size": 16,
        "seed": 0,
    },
    "evaluate": {
        "corpus": None,
        "model": None,
        "min_token_freq": 1,
        "split": "test",
        "threshold": 0.5,
    },
    "select": {
        "corpus": None,
        "model": None,
        "out": None,
        "audit": None,
        "min_token_freq": 1,
        "mode": "quantile",
        "q": 0.875,
        "threshold": None,
        "target_avg_len": None,
    },
    "density": {
        "corpus": None,
        "out": None,
        "min_token_freq": 1,
        "prob_source": "ngram",
        "ngram_order": 3,
        "smoothing_k": 0.1,
        "uid_distance": "squared",
        "uid_rate_source": "corpus_mean",
        "uid_unit": "token",
        "log_base": "nats",
    },
    "lexical": {"corpus": None, "out": None, "min_token_freq": 1, "threads": None},
    "compare": {
        "original": None,
        "variant": None,
        "out": None,
        "min_token_freq": 1,
        "ngram_order": 3,
        "smoothing_k": 0.1,
        "log_base": "nats",
    },
    "scale_ablation": {
        "corpus": None,
        "model": None,
        "selection": None,
        "min_token_freq": 1,
        "factors": "0,0.25,0.5,0.75,1",
        "target": "selected",
        "split": "test",
        "threshold": 0.5,
        "threads": None,
    },
}


def _load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"config file {path}: top level must be an object")
    return data


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """Merge defaults < config globals < config section < explicit flags."""
    defaults = _DEFAULTS[command]
    resolved = dict(defaults)
    if args.config is not None:
        data = _load_config(args.config)
        section = data.get(command, data.get(command.replace("_", "-"), {}))
        if not isinstance(section, dict):
            raise ValidationError(f"config section {command!r} must be an object")
        for source in ({k: v for k, v in data.items() if not isinstance(v, dict)}, section):
            for key, value in source.items():
                if key in resolved:
                    resolved[key] = value
    for key in resolved:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _require(resolved: dict, command: str, *keys: str):
    missing = [k for k in keys if resolved.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise UsageError(f"{command}: missing required {flags}")
    values = [resolved[k] for k in keys]
    return values[0] if len(values) == 1 else values


def _echo_config(resolved: dict, command: str) -> dict:
    """Resolved settings as recorded in summary.json.

    Output destinations and worker counts do not shape the numbers, so
    they are left out: the same analysis written twice must produce
    byte-identical reports wherever they land.
    """
    dropped = ("out", "audit", "threads")
    return {k: v for k, v in resolved.items() if k not in dropped} | {"command": command}


def _thread_count(resolved: dict) -> int:
    threads = resolved.get("threads")
    if threads is None:
        return os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise UsageError(f"--threads must be >= 1, got {threads}")
    return threads


def _pmap(fn, items, threads: int) -> list:
    """Order-preserving map; sequential when threads == 1 (bit-exact)."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# report emission shared by the density and lexical subcommands

def _emit_profile_report(
    out_dir,
    tag: str,
    doc_ids: list[str],
    per_doc: dict[str, dict[str, float]],
    metrics: tuple[str, ...],
    curve_metrics: tuple[str, ...],
    config: dict,
) -> list[str]:
    """Single-variant metrics.csv / summary.json / KDE SVGs.

    Mirrors the layout of the corpus-comparison report so downstream
    consumers parse both with one reader. Removes partial output on
    failure.
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    try:
        csv_path = os.path.join(out_dir, "metrics.csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["doc_id", "variant", "metric", "value"])
            for doc_id in doc_ids:
                for metric in metrics:
                    writer.writerow([doc_id, tag, metric, repr(per_doc[metric][doc_id])])
        written.append(csv_path)

        means = {
            metric: float(np.mean([per_doc[metric][d] for d in doc_ids]))
            for metric in metrics
        }
        summary = {
            "schema_version": SCHEMA_VERSION,
            "toolkit_version": __version__,
            "document_count": len(doc_ids),
            "variants": {tag: {"means": means}},
            "config": config,
        }
        json_path = os.path.join(out_dir, "summary.json")
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(json_path)

        for metric in curve_metrics:
            values = [per_doc[metric][d] for d in doc_ids]
            if len(values) < 2:
                _warn(f"skipping kde_{metric}.svg: need at least 2 documents")
                continue
            curve = kde(np.asarray(values, dtype=np.float64))
            svg = charts.line_chart(
                [(tag, curve.xs.tolist(), curve.ys.tolist())],
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


# ---------------------------------------------------------------------------
# subcommands

def _cmd_ingest(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "ingest")
    out = _require(resolved, "ingest", "out")
    corpus = load_corpus(args.source, min_token_freq=resolved["min_token_freq"])
    save_corpus(corpus, out)
    _note(
        f"ingested {len(corpus.documents)} documents, "
        f"{len(corpus.label_vocab)} labels -> {out}"
    )
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "synth")
    out = _require(resolved, "synth", "out")
    spec_fields = {
        k: resolved[k] for k in _DEFAULTS["synth"] if k not in ("out", "seed")
    }
    corpus = synthesize_corpus(GeneratorSpec(**spec_fields), seed=resolved["seed"])
    save_corpus(corpus, out)
    _note(f"synthesized {len(corpus.documents)} documents -> {out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "train")
    corpus_path, out = _require(resolved, "train", "corpus", "out")
    corpus = load_corpus(corpus_path, min_token_freq=resolved["min_token_freq"])
    config = TrainConfig(
        d_h=resolved["d_h"],
        window=resolved["window"],
        learning_rate=resolved["learning_rate"],
        epochs=resolved["epochs"],
        batch_size=resolved["batch_size"],
        seed=resolved["seed"],
    )
    model = train(corpus, config)
    save_model(model, out)
    if model.epoch_losses:
        _note(
            f"trained {config.epochs} epochs, "
            f"final mean loss {model.epoch_losses[-1]:.6f} -> {out}"
        )
    else:
        _note(f"saved untrained model -> {out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "evaluate")
    corpus_path, model_path = _require(resolved, "evaluate", "corpus", "model")
    corpus = load_corpus(corpus_path, min_token_freq=resolved["min_token_freq"])
    model = load_model(model_path)
    metrics = evaluate(
        model, corpus, split=resolved["split"], threshold=resolved["threshold"]
    )
    print(json.dumps(metrics.as_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_select(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "select")
    corpus_path, model_path, out = _require(resolved, "select", "corpus", "model", "out")
    corpus = load_corpus(corpus_path, min_token_freq=resolved["min_token_freq"])
    model = load_model(model_path)

    if resolved["target_avg_len"] is not None:
        if resolved["threshold"] is not None:
            raise UsageError("choose either --target-avg-len or --threshold, not both")
        reduced, results = reduce_corpus(
            corpus, model, target_avg_length=resolved["target_avg_len"]
        )
    elif resolved["mode"] == "fixed":
        threshold = _require(resolved, "select --mode fixed", "threshold")
        criteria = SelectionCriteria(mode="fixed", threshold=threshold)
        reduced, results = reduce_corpus(corpus, model, criteria)
    else:
        criteria = SelectionCriteria(mode="quantile", quantile=resolved["q"])
        reduced, results = reduce_corpus(corpus, model, criteria)

    save_corpus(reduced, out)
    audit_path = resolved["audit"]
    if audit_path is None:
        audit_path = os.path.splitext(str(out))[0] + ".audit.jsonl"
    with open(audit_path, "w", encoding="utf-8") as fh:
        for result in results:
            record = {
                "doc_id": result.doc_id,
                "threshold": result.threshold,
                "selected_indices": list(result.selected_indices),
                "removed_negations": list(result.removed_negations),
            }
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
    kept = sum(len(r.selected_indices) for r in results)
    total = sum(len(d.tokens) for d in corpus.documents)
    _note(
        f"selected {kept}/{total} tokens over {len(results)} documents "
        f"-> {out}, audit -> {audit_path}"
    )
    return 0


def _prob_source(resolved: dict, corpus: Corpus):
    spec = resolved["prob_source"]
    if spec == "ngram":
        return train_ngram(
            corpus, order=resolved["ngram_order"], smoothing_k=resolved["smoothing_k"]
        )
    if spec.startswith("sidecar:"):
        path = spec[len("sidecar:"):]
        if not path:
            raise UsageError("sidecar prob source needs a path: sidecar:<file.jsonl>")
        if not os.path.exists(path):
            raise FileNotFoundError(f"probability sidecar not found: {path}")
        return load_external_probs(path, corpus)
    raise UsageError(f"unknown --prob-source {spec!r}, expected ngram or sidecar:<path>")


def _cmd_density(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "density")
    corpus_path, out = _require(resolved, "density", "corpus", "out")
    corpus = load_corpus(corpus_path, min_token_freq=resolved["min_token_freq"])
    source = _prob_source(resolved, corpus)
    uid = UidConfig(
        distance=resolved["uid_distance"],
        rate_source=resolved["uid_rate_source"],
        unit=resolved["uid_unit"],
    )
    profiles, errors = corpus_density(corpus, source, uid=uid, base=resolved["log_base"])
    for err in errors:
        _warn(f"doc {err.doc_id!r}: {err.message}")
    if not profiles:
        raise ValidationError("no document could be scored by the probability source")
    per_doc = {
        "mean_surprisal": {p.doc_id: p.mean_surprisal for p in profiles},
        "entropy_frequency": {p.doc_id: p.entropy_frequency for p in profiles},
        "entropy_contextual": {p.doc_id: p.entropy_contextual for p in profiles},
        "uid_deviation": {p.doc_id: p.uid_deviation for p in profiles},
    }
    written = _emit_profile_report(
        out,
        tag="corpus",
        doc_ids=[p.doc_id for p in profiles],
        per_doc=per_doc,
        metrics=DENSITY_METRICS,
        curve_metrics=DENSITY_METRICS,
        config=_echo_config(resolved, "density"),
    )
    _note(f"wrote {len(written)} files -> {out}")
    return 0


def _cmd_lexical(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "lexical")
    corpus_path, out = _require(resolved, "lexical", "corpus", "out")
    corpus = load_corpus(corpus_path, min_token_freq=resolved["min_token_freq"])
    threads = _thread_count(resolved)
    profiles = _pmap(lexical_profile, corpus.documents, threads)
    per_doc = {
        metric: {p.doc_id: float(getattr(p, metric)) for p in profiles}
        for metric in LEXICAL_METRICS
    }
    written = _emit_profile_report(
        out,
        tag="corpus",
        doc_ids=[p.doc_id for p in profiles],
        per_doc=per_doc,
        metrics=LEXICAL_METRICS,
        curve_metrics=LEXICAL_CURVE_METRICS,
        config=_echo_config(resolved, "lexical"),
    )
    _note(f"wrote {len(written)} files -> {out}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "compare")
    original_path, variant_specs, out = _require(
        resolved, "compare", "original", "variant", "out"
    )
    if isinstance(variant_specs, str):
        variant_specs = [variant_specs]
    variants = []
    for spec in variant_specs:
        tag, sep, path = str(spec).partition("=")
        if not sep or not tag or not path:
            raise UsageError(f"--variant expects tag=path, got {spec!r}")
        variants.append(
            (tag, load_corpus(path, min_token_freq=resolved["min_token_freq"]))
        )
    original = load_corpus(original_path, min_token_freq=resolved["min_token_freq"])
    comparison = compare_corpora(
        original,
        variants,
        base=resolved["log_base"],
        ngram_order=resolved["ngram_order"],
        smoothing_k=resolved["smoothing_k"],
    )
    written = emit_report(comparison, out, extra_config=_echo_config(resolved, "compare"))
    _note(f"wrote {len(written)} files -> {out}")
    return 0


def _load_audit(path, corpus: Corpus) -> dict[str, SelectionResult]:
    """Rebuild SelectionResults from a select-run audit file."""
    results: dict[str, SelectionResult] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad audit record: {exc}", line=lineno) from exc
            if not isinstance(record, dict) or "doc_id" not in record:
                raise ParseError("audit record needs a 'doc_id'", line=lineno)
            doc_id = record["doc_id"]
            indices = record.get("selected_indices")
            if not isinstance(indices, list) or not all(
                isinstance(i, int) and not isinstance(i, bool) for i in indices
            ):
                raise ParseError(
                    "audit record needs integer 'selected_indices'", line=lineno
                )
            if doc_id in results:
                raise DuplicateDocumentError(
                    f"duplicate audit entry for doc {doc_id!r} at line {lineno}"
                )
            try:
                doc = corpus.document_by_id(doc_id)
            except KeyError:
                raise ValidationError(
                    f"audit references unknown document {doc_id!r}"
                ) from None
            n = len(doc.tokens)
            if any(i < 0 or i >= n for i in indices):
                raise ValidationError(
                    f"doc {doc_id!r}: audit selection index out of range"
                )
            indices = sorted(indices)
            surfaces = [doc.tokens[i].surface for i in indices]
            reduced = make_document(
                doc.id, " ".join(surfaces), labels=doc.labels, split=doc.split
            )
            results[doc_id] = SelectionResult(
                doc_id=doc_id,
                selected_indices=indices,
                threshold=float(record.get("threshold", 0.0)),
                reduced_doc=reduced,
                removed_negations=list(record.get("removed_negations", [])),
            )
    return results


def _cmd_scale_ablation(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "scale_ablation")
    corpus_path, model_path, audit_path = _require(
        resolved, "scale-ablation", "corpus", "model", "selection"
    )
    try:
        factors = [float(part) for part in str(resolved["factors"]).split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"--factors must be comma-separated numbers: {exc}") from exc
    if not factors:
        raise UsageError("--factors must name at least one scaling factor")
    if any(f < 0 for f in factors):
        raise UsageError("scaling factors must be >= 0")
    target = resolved["target"]
    if target not in ("selected", "non_selected"):
        raise UsageError(f"--target must be selected or non_selected, got {target!r}")

    corpus = load_corpus(corpus_path, min_token_freq=resolved["min_token_freq"])
    model = load_model(model_path)
    selections = _load_audit(audit_path, corpus)
    for doc in corpus.docs_in(resolved["split"]):
        if doc.id not in selections:
            raise ValidationError(f"audit file has no entry for document {doc.id!r}")

    def f1_row(factor: float) -> tuple[float, float, float]:
        metrics = evaluate(
            model,
            corpus,
            split=resolved["split"],
            threshold=resolved["threshold"],
            predict_fn=lambda doc: scaled_predict(
                model, doc, selections[doc.id], factor, target
            ),
        )
        return factor, metrics.f1_micro, metrics.f1_macro

    rows = _pmap(f1_row, factors, _thread_count(resolved))
    print("factor,f1_micro,f1_macro")
    for factor, micro, macro in rows:
        print(f"{repr(factor)},{repr(micro)},{repr(macro)}")
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file mirroring the flags")
    common.add_argument("--threads", type=int, help="worker cap; 1 = bit-exact")

    parser = _Parser(prog="textdensity", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", metavar="<command>")

    p = sub.add_parser("ingest", parents=[common], help="validate and normalize a corpus")
    p.add_argument("source", help="corpus JSONL to validate")
    p.add_argument("--out", help="normalized corpus JSONL")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--out")
    p.add_argument("--labels", type=int)
    p.add_argument("--docs-per-label", type=int, dest="docs_per_label")
    p.add_argument("--labels-per-doc", type=int, dest="labels_per_doc")
    p.add_argument("--keywords-per-label", type=int, dest="keywords_per_label")
    p.add_argument("--keyword-repeats", type=int, dest="keyword_repeats")
    p.add_argument("--filler-vocab", type=int, dest="filler_vocab")
    p.add_argument("--length-min", type=int, dest="length_min")
    p.add_argument("--length-max", type=int, dest="length_max")
    p.add_argument("--redundancy", type=float)
    p.add_argument("--train-frac", type=float, dest="train_frac")
    p.add_argument("--valid-frac", type=float, dest="valid_frac")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", parents=[common], help="train the attention classifier")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.add_argument("--d-h", type=int, dest="d_h")
    p.add_argument("--window", type=int)
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score a trained model")
    p.add_argument("--corpus")
    p.add_argument("--model")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.add_argument("--split", choices=("train", "valid", "test"))
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("select", parents=[common], help="reduce documents by attention")
    p.add_argument("--corpus")
    p.add_argument("--model")
    p.add_argument("--out", help="reduced corpus JSONL")
    p.add_argument("--audit", help="selection audit JSONL (default <out>.audit.jsonl)")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.add_argument("--mode", choices=("quantile", "fixed"))
    p.add_argument("--q", type=float)
    p.add_argument("--threshold", type=float)
    p.add_argument("--target-avg-len", type=float, dest="target_avg_len")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("density", parents=[common], help="information-density report")
    p.add_argument("--corpus")
    p.add_argument("--out", help="report directory")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.add_argument("--prob-source", dest="prob_source", help="ngram or sidecar:<path>")
    p.add_argument("--ngram-order", type=int, dest="ngram_order")
    p.add_argument("--smoothing-k", type=float, dest="smoothing_k")
    p.add_argument("--uid-distance", choices=("squared", "absolute"), dest="uid_distance")
    p.add_argument(
        "--uid-rate-source",
        choices=("corpus_mean", "document_mean"),
        dest="uid_rate_source",
    )
    p.add_argument("--uid-unit", choices=("token", "sentence"), dest="uid_unit")
    p.add_argument("--log-base", choices=("nats", "bits"), dest="log_base")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("lexical", parents=[common], help="readability and richness report")
    p.add_argument("--corpus")
    p.add_argument("--out", help="report directory")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.set_defaults(func=_cmd_lexical)

    p = sub.add_parser("compare", parents=[common], help="original-vs-variant report")
    p.add_argument("--original")
    p.add_argument("--variant", action="append", help="tag=path, repeatable")
    p.add_argument("--out", help="report directory")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.add_argument("--ngram-order", type=int, dest="ngram_order")
    p.add_argument("--smoothing-k", type=float, dest="smoothing_k")
    p.add_argument("--log-base", choices=("nats", "bits"), dest="log_base")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser(
        "scale-ablation", parents=[common], help="F1 versus embedding scaling factor"
    )
    p.add_argument("--corpus")
    p.add_argument("--model")
    p.add_argument("--selection", help="audit JSONL from a select run")
    p.add_argument("--min-token-freq", type=int, dest="min_token_freq")
    p.add_argument("--factors", help="comma-separated scaling factors")
    p.add_argument("--target", choices=("selected", "non_selected"))
    p.add_argument("--split", choices=("train", "valid", "test"))
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=_cmd_scale_ablation)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError("a subcommand is required (see --help)")
        return args.func(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except (ToolkitError, OSError, ValueError, KeyError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
