"""Second-stage reranking of keyword-retrieval candidates.

Two modes exist: the production-style Base mode scores the top 100
candidates on their short snippets; the quality-first Refined mode scores
up to 200 candidates on full paragraph text. The relevance scorer is
pluggable: a deterministic lexical-overlap fallback ships in-process and
a remote HTTP scorer adapts an external cross-encoder service.
"""

from __future__ import annotations

import math
import threading
import time
from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .corpus import CorpusStore
from .errors import RerankError
from .retrieval import AnalyzerConfig, analyze


class RerankVariant(Enum):
    BASE = "base"
    REFINED = "refined"


class RerankContext(Enum):
    SNIPPET = "snippet"
    FULL_PARAGRAPH = "full_paragraph"


@dataclass(frozen=True)
class RerankMode:
    variant: RerankVariant
    candidate_cap: int
    context: RerankContext

    @classmethod
    def base(cls) -> "RerankMode":
        return cls(RerankVariant.BASE, 100, RerankContext.SNIPPET)

    @classmethod
    def refined(cls) -> "RerankMode":
        return cls(RerankVariant.REFINED, 200, RerankContext.FULL_PARAGRAPH)


def lexical_overlap_scorer(query_text: str, passage_text: str) -> float:
    """Cosine similarity of term-frequency vectors; deterministic fallback."""
    config = AnalyzerConfig()
    q = Counter(analyze(query_text, config))
    p = Counter(analyze(passage_text, config))
    if not q or not p:
        return 0.0
    dot = sum(q[t] * p[t] for t in q)
    norm = math.sqrt(sum(v * v for v in q.values())) * math.sqrt(
        sum(v * v for v in p.values())
    )
    return dot / norm if norm else 0.0


class LexicalOverlapScorer:
    """Object form of the fallback scorer, matching the scorer interface."""

    def score(self, query_text: str, passage_text: str) -> float:
        return lexical_overlap_scorer(query_text, passage_text)


class RemoteScorer:
    """Adapter for an HTTP scoring service.

    POSTs ``{query, passages: [{id, text}]}`` to ``<base_url>/score`` and
    reads ``{scores: [{id, score}]}``. Responses are cached per
    (query, passage id) for the lifetime of the adapter, i.e. one
    pipeline run. Failures retry with exponential backoff.
    """

    def __init__(self, base_url: str, timeout: float = 10.0, retries: int = 3,
                 backoff: float = 0.1, client=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)
        self._cache = {}
        self._lock = threading.Lock()

    def score(self, query_text: str, passage_text: str, passage_id: str = None) -> float:
        pid = passage_id if passage_id is not None else passage_text
        key = (query_text, pid)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = self._request(query_text, pid, passage_text)
        with self._lock:
            self._cache[key] = value
        return value

    def _request(self, query_text, pid, passage_text) -> float:
        last_exc = None
        for attempt in range(self.retries):
            try:
                resp = self._client.post(
                    self.base_url + "/score",
                    json={"query": query_text,
                          "passages": [{"id": pid, "text": passage_text}]},
                )
                resp.raise_for_status()
                scores = {s["id"]: float(s["score"]) for s in resp.json()["scores"]}
                return scores[pid]
            except Exception as exc:  # noqa: BLE001 - any transport failure retries
                last_exc = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * (2 ** attempt))
        raise RerankError(f"scoring service failed after {self.retries} attempts: {last_exc}")


def remote_scorer(base_url: str, **kwargs) -> RemoteScorer:
    return RemoteScorer(base_url, **kwargs)


def rerank(candidates, mode: RerankMode, scorer, query_text: str,
           store: CorpusStore):
    """Re-sort the top candidates with the mode's context text.

    `candidates` is the first-stage (doc_id, score) list, best first.
    Exactly min(cap, n) items are scored; the rest are dropped. Output is
    sorted by rerank score descending, ties by first-stage rank, so a
    constant scorer preserves the input order. Any scorer failure aborts
    the whole call.
    """
    capped = list(candidates[: mode.candidate_cap])
    scored = []
    for rank, (doc_id, _first_stage) in enumerate(capped):
        doc = store.get(doc_id)
        text = doc.snippet if mode.context is RerankContext.SNIPPET else doc.paragraph
        try:
            if isinstance(scorer, RemoteScorer):
                value = scorer.score(query_text, text, passage_id=doc_id)
            elif callable(getattr(scorer, "score", None)):
                value = scorer.score(query_text, text)
            else:
                value = scorer(query_text, text)
        except RerankError:
            raise
        except Exception as exc:
            raise RerankError(f"scorer failed: {exc}", doc_id=doc_id) from exc
        if not 0.0 <= value <= 1.0:
            raise RerankError(f"score {value} outside [0,1]", doc_id=doc_id)
        scored.append((doc_id, value, rank))
    scored.sort(key=lambda item: (-item[1], item[2]))
    return [(doc_id, value) for doc_id, value, _ in scored]
