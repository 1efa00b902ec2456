"""Corpus analytics for long documents.

Measures how densely documents pack information (surprisal, entropy,
surprisal uniformity, readability, lexical richness) and reduces
documents to their most content-bearing words with a small per-label
attention classifier.
"""

__version__ = "0.1.0"
