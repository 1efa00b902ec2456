"""Word selection: quantile rule, calibration, corpus reduction, scaling harness."""

import dataclasses
import math

import numpy as np
import pytest

from textdensity.attention import AttentionScores, TrainConfig, init_model, predict
from textdensity.corpus import make_document
from textdensity.selection import (
    SelectionCriteria,
    SelectionResult,
    calibrate_threshold,
    quantile_threshold,
    reduce_corpus,
    scaled_predict,
    select_words,
)

from conftest import build_corpus


def scores_for(doc, pooled):
    pooled = np.asarray(pooled, dtype=np.float64)
    return AttentionScores(doc_id=doc.id, matrix=pooled[:, None], pooled=pooled)


def eight_token_doc():
    return make_document("d8", "one two three four five six seven eight.")


def nearest_rank_oracle(pooled, q):
    """Independent counting formulation: the smallest value v such that at
    least ceil(q*n) of the scores are <= v."""
    n = len(pooled)
    rank = max(1, math.ceil(q * n))
    for v in sorted(set(pooled)):
        if sum(1 for u in pooled if u <= v) >= rank:
            return v
    raise AssertionError("unreachable")


# --- SelectionCriteria -----------------------------------------------------------


def test_criteria_defaults():
    criteria = SelectionCriteria()
    assert criteria.mode == "quantile"
    assert criteria.quantile == 0.875
    assert criteria.threshold is None


@pytest.mark.parametrize(
    "kwargs",
    [
        {"quantile": 0.0},
        {"quantile": 1.0},
        {"quantile": -0.2},
        {"mode": "quantile", "threshold": 0.5},
        {"mode": "fixed"},
        {"mode": "percentile"},
    ],
)
def test_criteria_rejects_bad_combinations(kwargs):
    with pytest.raises(ValueError):
        SelectionCriteria(**kwargs)


# --- quantile threshold ----------------------------------------------------------


def test_quantile_threshold_nearest_rank_example():
    # 8 ascending scores, q=0.875: rank ceil(7) = 7th smallest = 0.7
    pooled = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])
    assert quantile_threshold(pooled, 0.875) == pytest.approx(0.7, abs=1e-15)


def test_quantile_threshold_matches_counting_oracle():
    rng = np.random.default_rng(23)
    for trial in range(200):
        n = int(rng.integers(1, 13))
        if trial % 2:
            pooled = rng.random(n)
        else:
            # heavy ties: few distinct values
            pooled = rng.choice([0.1, 0.25, 0.5, 0.9], size=n)
        q = float(rng.uniform(0.05, 0.95))
        assert quantile_threshold(pooled, q) == nearest_rank_oracle(pooled.tolist(), q)


# --- select_words ----------------------------------------------------------------


def test_select_words_quantile_example():
    doc = eight_token_doc()
    pooled = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
    result = select_words(scores_for(doc, pooled), SelectionCriteria(), doc)
    assert result.selected_indices == [6, 7]
    assert result.threshold == pytest.approx(0.7, abs=1e-15)
    assert [t.normalized for t in result.reduced_doc.tokens] == ["seven", "eight"]


def test_select_words_all_tied_keeps_everything():
    doc = eight_token_doc()
    result = select_words(scores_for(doc, [0.4] * 8), SelectionCriteria(), doc)
    assert result.selected_indices == list(range(8))


def test_select_words_fixed_above_max_falls_back_to_argmax():
    doc = make_document("d3", "alpha beta gamma.")
    pooled = [0.3, 0.9, 0.9]  # tie on the max: first occurrence wins
    criteria = SelectionCriteria(mode="fixed", threshold=2.0)
    result = select_words(scores_for(doc, pooled), criteria, doc)
    assert result.selected_indices == [1]
    assert [t.normalized for t in result.reduced_doc.tokens] == ["beta"]


def test_select_words_includes_threshold_ties():
    doc = make_document("d3", "alpha beta gamma.")
    criteria = SelectionCriteria(mode="fixed", threshold=0.5)
    result = select_words(scores_for(doc, [0.5, 0.5, 0.2]), criteria, doc)
    assert result.selected_indices == [0, 1]


def test_select_words_preserves_identity_and_metadata():
    doc = make_document("meta", "hawk dives low today.", ["alpha"], "test")
    result = select_words(scores_for(doc, [0.9, 0.1, 0.8, 0.2]), SelectionCriteria(quantile=0.5), doc)
    assert result.doc_id == "meta"
    assert result.reduced_doc.id == "meta"
    assert result.reduced_doc.labels == doc.labels
    assert result.reduced_doc.split == doc.split
    assert result.selected_indices == sorted(result.selected_indices)


def test_select_words_logs_removed_negations():
    doc = make_document("neg", "do not stop now.")
    criteria = SelectionCriteria(mode="fixed", threshold=0.5)
    result = select_words(scores_for(doc, [0.9, 0.1, 0.8, 0.7]), criteria, doc)
    assert result.removed_negations == ["not"]
    assert [t.normalized for t in result.reduced_doc.tokens] == ["do", "stop", "now"]

    kept = select_words(scores_for(doc, [0.9, 0.8, 0.7, 0.1]), criteria, doc)
    assert kept.removed_negations == []


def test_select_words_rejects_mismatches():
    doc = make_document("a", "one two three.")
    other = make_document("b", "one two three.")
    scores = scores_for(doc, [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        select_words(scores, SelectionCriteria(), other)
    with pytest.raises(ValueError):
        select_words(scores_for(doc, [0.1, 0.2]), SelectionCriteria(), doc)
    empty = make_document("a", "...")
    with pytest.raises(ValueError):
        select_words(scores_for(empty, []), SelectionCriteria(), empty)


def test_select_words_matches_exhaustive_oracle():
    rng = np.random.default_rng(31)
    words = "ab cd ef gh ij kl mn op qr st uv wx".split()
    for trial in range(120):
        n = int(rng.integers(1, 13))
        doc = make_document("x", " ".join(words[:n]) + ".")
        pooled = rng.choice([0.1, 0.3, 0.5, 0.7], size=n) if trial % 3 == 0 else rng.random(n)
        q = float(rng.uniform(0.05, 0.95))
        result = select_words(scores_for(doc, pooled), SelectionCriteria(quantile=q), doc)
        threshold = nearest_rank_oracle(pooled.tolist(), q)
        expected = [i for i in range(n) if pooled[i] >= threshold]
        assert result.selected_indices == expected
        assert result.threshold == threshold
        # a nearest-rank threshold always keeps at least one token
        assert len(result.selected_indices) >= 1


def test_quantile_selection_size_bound_on_distinct_scores():
    rng = np.random.default_rng(37)
    words = [f"w{i}" for i in range(30)]
    for _ in range(60):
        n = int(rng.integers(2, 30))
        doc = make_document("x", " ".join(words[:n]) + ".")
        pooled = rng.permutation(np.linspace(0.01, 0.99, n))
        q = float(rng.uniform(0.1, 0.9))
        result = select_words(scores_for(doc, pooled), SelectionCriteria(quantile=q), doc)
        kept = len(result.selected_indices)
        assert math.floor((1 - q) * n) <= kept <= math.ceil((1 - q) * n) + 1


def test_fixed_threshold_monotonicity():
    rng = np.random.default_rng(41)
    words = [f"w{i}" for i in range(16)]
    doc = make_document("x", " ".join(words) + ".")
    pooled = rng.random(16)
    previous = None
    for threshold in np.linspace(0.0, 1.1, 12):
        criteria = SelectionCriteria(mode="fixed", threshold=float(threshold))
        selected = set(select_words(scores_for(doc, pooled), criteria, doc).selected_indices)
        if previous is not None:
            assert selected <= previous
        previous = selected


# --- calibrate_threshold ---------------------------------------------------------


def calibration_oracle(pooled_lists, target):
    """Brute force over every candidate; ties prefer the larger threshold."""
    candidates = sorted({v for p in pooled_lists for v in p})

    def mean_length(t):
        return sum(max(sum(1 for v in p if v >= t), 1) for p in pooled_lists) / len(pooled_lists)

    best, best_gap = None, None
    for c in candidates:
        gap = abs(mean_length(c) - target)
        if best is None or gap < best_gap or (gap == best_gap and c > best):
            best, best_gap = c, gap
    return best


def test_calibrate_single_doc_target_one():
    assert calibrate_threshold([np.array([0.2, 0.9])], 1) == pytest.approx(0.9)


def test_calibrate_target_above_all_lengths_keeps_everything():
    pooled = [np.array([0.5, 0.2, 0.7]), np.array([0.4, 0.6, 0.3, 0.8, 0.1])]
    threshold = calibrate_threshold(pooled, 5)
    # the lowest candidate keeps every token in both documents
    assert threshold == pytest.approx(0.1)
    assert all(np.all(p >= threshold) for p in pooled)


def test_calibrate_matches_brute_force_on_toy_corpora():
    rng = np.random.default_rng(43)
    for _ in range(80):
        pooled = [rng.random(int(rng.integers(1, 9))) for _ in range(3)]
        target = float(rng.integers(1, 9))
        got = calibrate_threshold([np.asarray(p) for p in pooled], target)
        want = calibration_oracle([p.tolist() for p in pooled], target)
        assert got == want


def test_calibrate_rejects_bad_inputs():
    with pytest.raises(ValueError):
        calibrate_threshold([], 5)
    with pytest.raises(ValueError):
        calibrate_threshold([np.array([0.5])], 0)
    with pytest.raises(ValueError):
        calibrate_threshold([np.array([0.5]), np.array([])], 2)


# --- reduce_corpus ---------------------------------------------------------------


def model_for(corpus):
    return init_model(corpus, TrainConfig(d_h=8, seed=3))


def test_reduce_corpus_identity_when_threshold_below_all(tiny_labeled_corpus):
    model = model_for(tiny_labeled_corpus)
    criteria = SelectionCriteria(mode="fixed", threshold=0.0)
    reduced, results = reduce_corpus(tiny_labeled_corpus, model, criteria)
    assert len(results) == len(tiny_labeled_corpus.documents)
    for before, after in zip(tiny_labeled_corpus.documents, reduced.documents):
        assert [t.normalized for t in after.tokens] == [t.normalized for t in before.tokens]
        assert after.labels == before.labels
        assert after.split == before.split


def test_reduce_corpus_preserves_one_token_documents():
    corpus = build_corpus([("solo", "word.", ["x"], "train")])
    model = model_for(corpus)
    reduced, results = reduce_corpus(corpus, model, SelectionCriteria())
    assert [t.normalized for t in reduced.documents[0].tokens] == ["word"]
    assert results[0].selected_indices == [0]


def test_reduce_corpus_passes_empty_documents_through():
    corpus = build_corpus([("full", "hawk flies.", ["x"], "train"), ("hollow", "...", ["x"], "train")])
    model = model_for(corpus)
    reduced, results = reduce_corpus(corpus, model, SelectionCriteria())
    assert [r.doc_id for r in results] == ["full"]
    hollow = reduced.document_by_id("hollow")
    assert hollow.tokens == []


def test_reduce_corpus_quantile_shrinks_longer_documents(tiny_labeled_corpus):
    model = model_for(tiny_labeled_corpus)
    reduced, results = reduce_corpus(tiny_labeled_corpus, model, SelectionCriteria())
    for before, result in zip(tiny_labeled_corpus.documents, results):
        kept = [t.normalized for t in result.reduced_doc.tokens]
        original = [t.normalized for t in before.tokens]
        assert 1 <= len(kept) <= len(original)
        it = iter(original)
        assert all(token in it for token in kept)  # subsequence check


def test_reduce_corpus_with_target_length_calibrates_global_threshold(tiny_labeled_corpus):
    from textdensity.attention import attention_scores

    model = model_for(tiny_labeled_corpus)
    reduced, results = reduce_corpus(tiny_labeled_corpus, model, target_avg_length=3)
    thresholds = {r.threshold for r in results}
    assert len(thresholds) == 1
    pooled = [
        attention_scores(model, d).pooled.tolist()
        for d in tiny_labeled_corpus.documents
        if d.tokens
    ]
    assert thresholds.pop() == calibration_oracle(pooled, 3)
    mean_len = np.mean([len(r.reduced_doc.tokens) for r in results])
    assert abs(mean_len - 3) <= 2  # closest achievable candidate stays near the target


# --- scaled_predict --------------------------------------------------------------


def test_scaled_predict_factor_one_is_bitwise_identity(tiny_labeled_corpus):
    model = model_for(tiny_labeled_corpus)
    doc = tiny_labeled_corpus.documents[0]
    from textdensity.attention import attention_scores

    selection = select_words(attention_scores(model, doc), SelectionCriteria(), doc)
    base = predict(model, doc)
    for target in ("selected", "non_selected"):
        np.testing.assert_array_equal(
            scaled_predict(model, doc, selection, 1.0, target=target), base
        )


def test_scaled_predict_factor_zero_everywhere_matches_zero_embeddings(tiny_labeled_corpus):
    model = model_for(tiny_labeled_corpus)
    doc = tiny_labeled_corpus.documents[0]
    all_positions = SelectionResult(
        doc_id=doc.id,
        selected_indices=list(range(len(doc.tokens))),
        threshold=0.0,
        reduced_doc=doc,
        removed_negations=[],
    )
    scaled = scaled_predict(model, doc, all_positions, 0.0, target="selected")
    zeroed = dataclasses.replace(model, embedding=np.zeros_like(model.embedding))
    np.testing.assert_allclose(scaled, predict(zeroed, doc), atol=1e-15)


def test_scaled_predict_validates_arguments(tiny_labeled_corpus):
    model = model_for(tiny_labeled_corpus)
    doc = tiny_labeled_corpus.documents[0]
    selection = SelectionResult(
        doc_id=doc.id, selected_indices=[0], threshold=0.5, reduced_doc=doc, removed_negations=[]
    )
    with pytest.raises(ValueError):
        scaled_predict(model, doc, selection, -0.5)
    with pytest.raises(ValueError):
        scaled_predict(model, doc, selection, 0.5, target="everything")
    other = tiny_labeled_corpus.documents[1]
    with pytest.raises(ValueError):
        scaled_predict(model, other, selection, 0.5)
    rogue = dataclasses.replace(selection, selected_indices=[99])
    with pytest.raises(ValueError):
        scaled_predict(model, doc, rogue, 0.5)
