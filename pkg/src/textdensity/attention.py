"""Per-label attention classifier over windowed embedding features.

Each position i gets a hidden vector H[i]: the mean of the token
embeddings in an odd-sized window centered at i, truncated at document
edges. A label-wise softmax over positions A = softmax_columns(H U)
turns those into per-label context vectors c_j = sum_i A[i,j] H[i], and
score_j = sigmoid(w_j . c_j + b_j). Training is plain SGD on the mean
per-label binary cross-entropy; one fixed seed makes the whole run
bit-for-bit reproducible.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .corpus import Corpus, Document
from .errors import TrainingError, ValidationError

_log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

# Embeddings start small and uniform; the attention query gets a much
# wider band so position logits differentiate early (with the tiny
# embedding scale, a timid query keeps attention near-uniform for most
# of a default-length run). Label heads start at zero, which makes
# every initial probability exactly 0.5.
EMBED_INIT = 0.05
QUERY_INIT = 4.0


@dataclass
class TrainConfig:
    d_h: int = 64
    window: int = 3
    learning_rate: float = 0.05
    epochs: int = 20
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.d_h < 1:
            raise ValueError(f"d_h must be >= 1, got {self.d_h}")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be a positive odd integer, got {self.window}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class AttentionModel:
    tokens: list[str]  # vocabulary types; the unknown row is appended last
    labels: list[str]
    window: int
    seed: int
    embedding: np.ndarray  # (len(tokens)+1, d_h)
    attn_query: np.ndarray  # (d_h, m)
    head_weight: np.ndarray  # (m, d_h)
    head_bias: np.ndarray  # (m,)
    epoch_losses: list[float] = field(default_factory=list, compare=False)
    _token_index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self._token_index:
            self._token_index = {t: i for i, t in enumerate(self.tokens)}

    @property
    def d_h(self) -> int:
        return self.embedding.shape[1]

    @property
    def unknown_row(self) -> int:
        return self.embedding.shape[0] - 1

    def token_ids(self, doc: Document) -> np.ndarray:
        unk = self.unknown_row
        return np.array(
            [self._token_index.get(t.normalized, unk) for t in doc.tokens], dtype=np.intp
        )


@dataclass
class AttentionScores:
    doc_id: str
    matrix: np.ndarray  # (n, m) attention weights, columns sum to 1
    pooled: np.ndarray  # (n,) mean over labels


def init_model(corpus: Corpus, config: TrainConfig) -> AttentionModel:
    if not corpus.label_vocab:
        raise TrainingError("corpus has no labels to train on")
    rng = np.random.default_rng(config.seed)
    tokens = corpus.type_tokens
    m = len(corpus.label_vocab)
    embedding = rng.uniform(-EMBED_INIT, EMBED_INIT, size=(len(tokens) + 1, config.d_h))
    attn_query = rng.uniform(-QUERY_INIT, QUERY_INIT, size=(config.d_h, m))
    return AttentionModel(
        tokens=tokens,
        labels=list(corpus.label_vocab),
        window=config.window,
        seed=config.seed,
        embedding=embedding,
        attn_query=attn_query,
        head_weight=np.zeros((m, config.d_h)),
        head_bias=np.zeros(m),
    )


def hidden_features(model: AttentionModel, doc: Document) -> np.ndarray:
    """Windowed means of the document's embedding rows, one per position."""
    if not doc.tokens:
        raise ValueError(f"doc {doc.id!r}: empty document has no features")
    x = model.embedding[model.token_ids(doc)]
    return kernels.window_mean(x, model.window)


def label_attention(h: np.ndarray, attn_query: np.ndarray) -> np.ndarray:
    """Column softmax of H U over positions: every label column is a
    distribution over the document's tokens."""
    return kernels.column_softmax(h @ attn_query)


def mean_pool(attention: np.ndarray) -> np.ndarray:
    """Per-position salience: mean attention weight over labels."""
    return attention.mean(axis=1)


def _forward(model: AttentionModel, x: np.ndarray):
    h = kernels.window_mean(x, model.window)
    a = kernels.column_softmax(h @ model.attn_query)
    c = a.T @ h
    logits = (model.head_weight * c).sum(axis=1) + model.head_bias
    scores = np.empty_like(logits)
    pos = logits >= 0
    scores[pos] = 1.0 / (1.0 + np.exp(-logits[pos]))
    ez = np.exp(logits[~pos])
    scores[~pos] = ez / (1.0 + ez)
    return h, a, scores


def predict(model: AttentionModel, doc: Document) -> np.ndarray:
    """Per-label probabilities for one document."""
    if not doc.tokens:
        raise ValueError(f"doc {doc.id!r}: cannot score an empty document")
    x = model.embedding[model.token_ids(doc)]
    _, _, scores = _forward(model, x)
    return scores


def attention_scores(model: AttentionModel, doc: Document) -> AttentionScores:
    if not doc.tokens:
        raise ValueError(f"doc {doc.id!r}: cannot score an empty document")
    x = model.embedding[model.token_ids(doc)]
    _, a, _ = _forward(model, x)
    return AttentionScores(doc_id=doc.id, matrix=a, pooled=mean_pool(a))


def train(corpus: Corpus, config: TrainConfig | None = None) -> AttentionModel:
    """Fit the classifier on the train split.

    Batch gradients are summed over documents, then applied once per
    batch with the fixed learning rate. Epoch order is reshuffled from
    the same seeded generator used for initialization, so a (corpus,
    config) pair always produces the same parameters.
    """
    config = config or TrainConfig()
    model = init_model(corpus, config)
    docs = [d for d in corpus.docs_in("train") if d.tokens]
    if not docs:
        raise TrainingError("corpus has no non-empty train documents")

    rng = np.random.default_rng(config.seed + 1)
    label_index = {lab: j for j, lab in enumerate(model.labels)}
    ids_list = [model.token_ids(d) for d in docs]
    targets_list = []
    for d in docs:
        t = np.zeros(len(model.labels))
        for lab in d.labels:
            t[label_index[lab]] = 1.0
        targets_list.append(t)

    order = np.arange(len(docs))
    for _ in range(config.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            d_emb = np.zeros_like(model.embedding)
            d_query = np.zeros_like(model.attn_query)
            d_head_w = np.zeros_like(model.head_weight)
            d_head_b = np.zeros_like(model.head_bias)
            for idx in batch:
                ids = ids_list[idx]
                x = model.embedding[ids]
                loss, _, dx, du, dw, db = kernels.loss_and_grads(
                    x,
                    model.attn_query,
                    model.head_weight,
                    model.head_bias,
                    targets_list[idx],
                    model.window,
                )
                epoch_loss += loss
                kernels.add_rows(d_emb, ids, dx)
                d_query += du
                d_head_w += dw
                d_head_b += db
            lr = config.learning_rate
            model.embedding -= lr * d_emb
            model.attn_query -= lr * d_query
            model.head_weight -= lr * d_head_w
            model.head_bias -= lr * d_head_b
        model.epoch_losses.append(epoch_loss / len(docs))
    return model


@dataclass
class EvalMetrics:
    auc_macro: float
    auc_micro: float
    f1_macro: float
    f1_micro: float
    precision_at_5: float
    document_count: int
    labels_scored: int  # labels with both positives and negatives in the split

    def as_dict(self) -> dict:
        return {
            "auc_macro": self.auc_macro,
            "auc_micro": self.auc_micro,
            "f1_macro": self.f1_macro,
            "f1_micro": self.f1_micro,
            "precision_at_5": self.precision_at_5,
            "document_count": self.document_count,
            "labels_scored": self.labels_scored,
        }


def _binary_auc(gold: np.ndarray, scores: np.ndarray) -> float:
    """Area under the ROC step curve via the rank statistic; tied scores
    receive their average rank, matching trapezoidal interpolation."""
    n_pos = int(gold.sum())
    n_neg = gold.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(gold.size, dtype=np.float64)
    i = 0
    while i < gold.size:
        j = i
        while j + 1 < gold.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    pos_rank_sum = float(ranks[gold > 0].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _f1(gold: np.ndarray, predicted: np.ndarray) -> float:
    tp = float(np.sum(predicted & (gold > 0)))
    fp = float(np.sum(predicted & (gold == 0)))
    fn = float(np.sum(~predicted & (gold > 0)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def evaluate(
    model: AttentionModel,
    corpus: Corpus,
    split: str = "test",
    threshold: float = 0.5,
    predict_fn=None,
) -> EvalMetrics:
    """Ranking and thresholded metrics over one split.

    Macro averages run over labels that have at least one positive and
    one negative document in the split; the rest are logged and skipped.
    Micro metrics pool every (document, label) decision. predict_fn
    overrides the scoring function (used by the scaling diagnostics).
    """
    docs = [d for d in corpus.docs_in(split) if d.tokens]
    if not docs:
        raise ValidationError(f"split {split!r} has no non-empty documents")
    score_doc = predict_fn or (lambda d: predict(model, d))
    label_index = {lab: j for j, lab in enumerate(model.labels)}
    m = len(model.labels)
    scores = np.vstack([score_doc(d) for d in docs])
    gold = np.zeros((len(docs), m))
    for i, d in enumerate(docs):
        for lab in d.labels:
            if lab in label_index:
                gold[i, label_index[lab]] = 1.0

    usable = [
        j for j in range(m) if 0 < gold[:, j].sum() < len(docs)
    ]
    skipped = [model.labels[j] for j in range(m) if j not in set(usable)]
    if skipped:
        _log.info("evaluate: excluding %d degenerate label(s) from macro averages: %s",
                  len(skipped), ", ".join(skipped))

    predicted = scores >= threshold
    if usable:
        auc_macro = float(np.mean([_binary_auc(gold[:, j], scores[:, j]) for j in usable]))
        f1_macro = float(np.mean([_f1(gold[:, j], predicted[:, j]) for j in usable]))
    else:
        auc_macro = float("nan")
        f1_macro = float("nan")

    flat_gold = gold.ravel()
    flat_scores = scores.ravel()
    if 0 < flat_gold.sum() < flat_gold.size:
        auc_micro = _binary_auc(flat_gold, flat_scores)
    else:
        auc_micro = float("nan")
    f1_micro = _f1(flat_gold, predicted.ravel())

    k = min(5, m)
    hits = 0.0
    for i in range(len(docs)):
        # stable sort on (-score, index): ties resolve to the lower index
        top = np.argsort(-scores[i], kind="mergesort")[:k]
        hits += sum(1.0 for j in top if gold[i, j] > 0)
    p_at_5 = hits / (len(docs) * 5)

    return EvalMetrics(
        auc_macro=auc_macro,
        auc_micro=float(auc_micro),
        f1_macro=f1_macro,
        f1_micro=float(f1_micro),
        precision_at_5=float(p_at_5),
        document_count=len(docs),
        labels_scored=len(usable),
    )


def save_model(model: AttentionModel, path) -> None:
    """Write a checkpoint; loading restores every array bit for bit."""
    meta = {
        "format_version": CHECKPOINT_VERSION,
        "window": model.window,
        "seed": model.seed,
    }
    with open(path, "wb") as fh:
        np.savez(
            fh,
            meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8),
            tokens=np.array(model.tokens, dtype=np.str_),
            labels=np.array(model.labels, dtype=np.str_),
            embedding=model.embedding,
            attn_query=model.attn_query,
            head_weight=model.head_weight,
            head_bias=model.head_bias,
        )


def load_model(path) -> AttentionModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format_version") != CHECKPOINT_VERSION:
            raise ValidationError(
                f"unsupported checkpoint version {meta.get('format_version')!r}, "
                f"expected {CHECKPOINT_VERSION}"
            )
        return AttentionModel(
            tokens=[str(t) for t in data["tokens"].tolist()],
            labels=[str(t) for t in data["labels"].tolist()],
            window=int(meta["window"]),
            seed=int(meta["seed"]),
            embedding=data["embedding"],
            attn_query=data["attn_query"],
            head_weight=data["head_weight"],
            head_bias=data["head_bias"],
        )
