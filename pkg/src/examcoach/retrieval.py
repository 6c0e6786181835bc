"""Keyword retrieval: text analysis, synonym expansion, inverted index, BM25.

The analyzer lowercases, splits on punctuation/whitespace and removes
stopwords while preserving diacritics, so Polish text survives intact.
Synonym expansion happens at query time: every member of a matched
synonym class joins the query at half weight, keeping the index compact.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .corpus import CorpusStore

_TOKEN = re.compile(r"\w+", re.UNICODE)


@dataclass
class AnalyzerConfig:
    lowercase: bool = True
    strip_punctuation: bool = True
    preserve_diacritics: bool = True
    stopwords: frozenset = frozenset()
    synonym_classes: tuple = ()  # tuple of frozensets of terms

    def synonym_class_of(self, term: str):
        for cls in self.synonym_classes:
            if term in cls:
                return cls
        return None


def load_stopwords(path) -> frozenset:
    with open(path, encoding="utf-8") as fh:
        return frozenset(
            line.strip() for line in fh if line.strip() and not line.startswith("#")
        )


def load_synonyms(path) -> tuple:
    """One synonym class per line, comma-separated terms."""
    classes = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            terms = frozenset(t.strip().lower() for t in line.split(",") if t.strip())
            if len(terms) >= 2:
                classes.append(terms)
    return tuple(classes)


def analyze(text: str, config: AnalyzerConfig = AnalyzerConfig()) -> list:
    if config.lowercase:
        text = text.lower()
    if config.strip_punctuation:
        tokens = _TOKEN.findall(text)
    else:
        tokens = text.split()
    return [t for t in tokens if t not in config.stopwords]


def expand_query(tokens, config: AnalyzerConfig) -> dict:
    """Weighted term set: literal tokens at 1.0, synonym-class mates at 0.5.

    Deduplication keeps the maximum weight per term.
    """
    weights = {}
    for token in tokens:
        weights[token] = 1.0
        cls = config.synonym_class_of(token)
        if cls:
            for member in cls:
                if member != token:
                    weights[member] = max(weights.get(member, 0.0), 0.5)
    return weights


@dataclass
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must be in [0, 1]")


@dataclass
class InvertedIndex:
    postings: dict = field(default_factory=dict)  # term -> [(doc_id, tf)] sorted
    doc_lengths: dict = field(default_factory=dict)
    doc_count: int = 0

    @property
    def avg_doc_length(self) -> float:
        if not self.doc_lengths:
            return 0.0
        return sum(self.doc_lengths.values()) / len(self.doc_lengths)

    def to_json(self) -> str:
        return json.dumps(
            {
                "postings": {t: p for t, p in self.postings.items()},
                "doc_lengths": self.doc_lengths,
                "doc_count": self.doc_count,
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, text: str) -> "InvertedIndex":
        obj = json.loads(text)
        return cls(
            postings={t: [tuple(x) for x in p] for t, p in obj["postings"].items()},
            doc_lengths=obj["doc_lengths"],
            doc_count=obj["doc_count"],
        )


def build_index(store: CorpusStore, config: AnalyzerConfig) -> InvertedIndex:
    index = InvertedIndex()
    counts = {}
    for doc in store:
        tokens = analyze(doc.paragraph, config)
        index.doc_lengths[doc.doc_id] = len(tokens)
        tf = {}
        for token in tokens:
            tf[token] = tf.get(token, 0) + 1
        counts[doc.doc_id] = tf
    index.doc_count = len(index.doc_lengths)
    for doc_id in sorted(counts):
        for term, freq in counts[doc_id].items():
            index.postings.setdefault(term, []).append((doc_id, freq))
    return index


def idf(n_docs: int, doc_freq: int) -> float:
    return math.log(1.0 + (n_docs - doc_freq + 0.5) / (doc_freq + 0.5))


def search(index: InvertedIndex, query: dict, k: int,
           params: Bm25Params = Bm25Params()) -> list:
    """Top-k BM25 search over a weighted term set.

    Scores are summed per document over query terms; documents with zero
    score are omitted. Ties break by ascending doc_id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = index.doc_count
    avg_len = index.avg_doc_length
    scores = {}
    for term, weight in query.items():
        postings = index.postings.get(term)
        if not postings:
            continue
        term_idf = idf(n, len(postings))
        for doc_id, tf in postings:
            norm = params.k1 * (1.0 - params.b + params.b * index.doc_lengths[doc_id] / avg_len)
            contrib = weight * term_idf * tf * (params.k1 + 1.0) / (tf + norm)
            scores[doc_id] = scores.get(doc_id, 0.0) + contrib
    ranked = sorted(
        ((d, s) for d, s in scores.items() if s > 0.0),
        key=lambda item: (-item[1], item[0]),
    )
    return ranked[:k]
