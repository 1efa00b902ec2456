"""Shared corpus builders for the test suite."""

import pytest

from textdensity.corpus import Corpus, make_document


def build_corpus(rows, min_token_freq=1):
    """rows: (doc_id, text) or (doc_id, text, labels) or + split."""
    documents = []
    for row in rows:
        doc_id, text = row[0], row[1]
        labels = row[2] if len(row) > 2 else ()
        split = row[3] if len(row) > 3 else "train"
        documents.append(make_document(doc_id, text, labels, split))
    return Corpus.from_documents(documents, min_token_freq=min_token_freq)


@pytest.fixture
def tiny_labeled_corpus():
    """Two labels, each keyed by one unmistakable token."""
    rows = []
    for i in range(12):
        label = "alpha" if i % 2 == 0 else "beta"
        keyword = "hawk" if label == "alpha" else "mole"
        split = "train" if i < 8 else "test"
        text = f"{keyword} filler one two {keyword} three four {keyword} five."
        rows.append((f"d{i}", text, [label], split))
    return build_corpus(rows)
