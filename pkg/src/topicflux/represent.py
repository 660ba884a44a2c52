"""Textual topic representations: per-class term weighting and search.

Terms are pooled per cluster (class), normalized within the class, and
reweighted by ln(1 + A/f) where A is the average class token mass and f
the corpus frequency of the term; taking the square root of the normalized
frequency first damps ubiquitous terms. Search ranks topics by cosine
between a query's term counts and each class weight vector.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .cluster import OUTLIER
from .stopwords import STOPWORDS_VERSION, english_stopwords

# alphanumeric runs, optionally joined by single internal hyphens:
# `covid-19` and `sars-cov-2` stay whole, bare punctuation disappears
_TOKEN_RE = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*")


class RepresentError(Exception):
    pass


def tokenize(text: str | None) -> list[str]:
    """Lowercased hyphen-preserving tokens, stopwords and 1-char tokens out."""
    if not text:
        return []
    stopset = english_stopwords()
    return [
        t
        for t in _TOKEN_RE.findall(text.lower())
        if len(t) > 1 and t not in stopset
    ]


@dataclass
class Vocabulary:
    terms: list[str]  # index -> term, lexicographically sorted
    term_index: dict[str, int]
    corpus_frequency: np.ndarray  # f_t, total count across classes
    stopword_list_id: str = STOPWORDS_VERSION

    def __len__(self) -> int:
        return len(self.terms)


@dataclass
class SparseRows:
    """CSR-layout matrix: one row per class over the vocabulary."""

    indptr: np.ndarray  # (C+1,) int64
    indices: np.ndarray  # int64, column ids
    values: np.ndarray  # float64
    n_cols: int

    @property
    def n_rows(self) -> int:
        return self.indptr.size - 1

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.values[lo:hi]

    def row_dense(self, i: int) -> np.ndarray:
        out = np.zeros(self.n_cols)
        idx, val = self.row(i)
        out[idx] = val
        return out


@dataclass
class ClassTfIdfModel:
    vocabulary: Vocabulary
    weights: SparseRows  # W(t, c) per class row
    class_sizes: np.ndarray  # documents per class
    average_class_mass: float  # A: mean token count per class
    reduce_frequent_words: bool = True


@dataclass
class TopicCard:
    topic_id: int
    size: int
    top_terms: list[tuple[str, float]]
    similarity: float | None = None


@dataclass
class SearchResult:
    cards: list[TopicCard]
    status: str  # "ok" | "all_terms_unknown"


def build_class_counts(
    texts: list[str | None], labels
) -> tuple[Vocabulary, SparseRows]:
    """Token counts pooled per non-outlier class.

    Outlier documents are excluded entirely; terms seen only in outlier
    documents never enter the vocabulary.
    """
    labels = np.asarray(labels)
    if len(texts) != labels.size:
        raise RepresentError(f"{len(texts)} texts vs {labels.size} labels")
    class_ids = sorted(int(c) for c in np.unique(labels) if c != OUTLIER)
    if not class_ids:
        raise RepresentError("no non-outlier classes to represent")

    counters = {c: Counter() for c in class_ids}
    for text, label in zip(texts, labels):
        if label == OUTLIER:
            continue
        counters[int(label)].update(tokenize(text))

    total = Counter()
    for counter in counters.values():
        total.update(counter)
    terms = sorted(total)
    term_index = {t: i for i, t in enumerate(terms)}
    freq = np.array([total[t] for t in terms], dtype=np.float64)
    vocab = Vocabulary(terms=terms, term_index=term_index, corpus_frequency=freq)

    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    for c in class_ids:
        items = sorted((term_index[t], cnt) for t, cnt in counters[c].items())
        indices.extend(i for i, _ in items)
        values.extend(float(v) for _, v in items)
        indptr.append(len(indices))
    counts = SparseRows(
        indptr=np.array(indptr, dtype=np.int64),
        indices=np.array(indices, dtype=np.int64),
        values=np.array(values, dtype=np.float64),
        n_cols=len(terms),
    )
    return vocab, counts


def class_tfidf(
    vocab: Vocabulary,
    counts: SparseRows,
    class_sizes,
    reduce_frequent_words: bool = True,
) -> ClassTfIdfModel:
    """Fit the per-class weight matrix from pooled counts.

    W(t, c) = tf(t, c) * ln(1 + A / f_t), with tf the class-normalized
    frequency (square-rooted when frequent-word reduction is on), A the
    mean class token mass, f_t the corpus frequency of the term.
    """
    masses = np.array(
        [counts.values[counts.indptr[c] : counts.indptr[c + 1]].sum() for c in range(counts.n_rows)]
    )
    empty = np.nonzero(masses == 0)[0]
    if empty.size:
        raise RepresentError(f"class {int(empty[0])} has no tokens")
    A = float(masses.mean())

    values = counts.values.copy()
    for c in range(counts.n_rows):
        lo, hi = counts.indptr[c], counts.indptr[c + 1]
        tf = values[lo:hi] / masses[c]
        if reduce_frequent_words:
            tf = np.sqrt(tf)
        values[lo:hi] = tf * np.log1p(A / vocab.corpus_frequency[counts.indices[lo:hi]])

    weights = SparseRows(
        indptr=counts.indptr.copy(),
        indices=counts.indices.copy(),
        values=values,
        n_cols=counts.n_cols,
    )
    return ClassTfIdfModel(
        vocabulary=vocab,
        weights=weights,
        class_sizes=np.asarray(class_sizes, dtype=np.int64),
        average_class_mass=A,
        reduce_frequent_words=reduce_frequent_words,
    )


def top_terms(model: ClassTfIdfModel, topic_id: int, n: int = 30) -> list[tuple[str, float]]:
    """The n heaviest terms of a topic; equal weights order lexicographically."""
    if not 0 <= topic_id < model.weights.n_rows:
        raise RepresentError(f"unknown topic: {topic_id}")
    idx, val = model.weights.row(topic_id)
    pairs = sorted(
        ((model.vocabulary.terms[i], float(v)) for i, v in zip(idx, val)),
        key=lambda p: (-p[1], p[0]),
    )
    return pairs[:n]


def search_topics(
    model: ClassTfIdfModel,
    query: str,
    n: int = 6,
    card_terms: int = 30,
) -> SearchResult:
    """Rank topics by cosine similarity to the query's term-count vector."""
    tokens = tokenize(query)
    if not tokens:
        raise RepresentError("no searchable terms")
    counts = Counter(tokens)
    known = {t: c for t, c in counts.items() if t in model.vocabulary.term_index}
    if not known:
        return SearchResult(cards=[], status="all_terms_unknown")

    q = np.zeros(len(model.vocabulary))
    for t, c in known.items():
        q[model.vocabulary.term_index[t]] = float(c)
    q_norm = float(np.linalg.norm(q))

    scored = []
    for c in range(model.weights.n_rows):
        idx, val = model.weights.row(c)
        w_norm = float(np.linalg.norm(val))
        if w_norm == 0.0:
            sim = 0.0
        else:
            sim = float(q[idx] @ val / (q_norm * w_norm))
        scored.append((-sim, c))
    scored.sort()

    cards = [
        TopicCard(
            topic_id=c,
            size=int(model.class_sizes[c]),
            top_terms=top_terms(model, c, card_terms),
            similarity=max(0.0, min(1.0, -neg_sim)),
        )
        for neg_sim, c in scored[: max(0, n)]
    ]
    return SearchResult(cards=cards, status="ok")
