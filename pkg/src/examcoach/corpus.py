"""Paragraph-granular document corpus with source-value ordering.

The corpus is a flat line-delimited JSON file loaded once at startup and
immutable afterwards. Each record is one indexed paragraph (roughly 500
words) together with a short user-facing snippet and source metadata.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import cmp_to_key

from .errors import DuplicateIdError, ParseError

SNIPPET_MAX_CHARS = 160  # target ~140; slack avoids mid-grapheme cuts


class SourceKind(Enum):
    GUIDELINE = "Guideline"
    TEXTBOOK = "Textbook"
    JOURNAL_ARTICLE = "JournalArticle"
    CASE_REPORT = "CaseReport"
    OTHER = "Other"


# Synthesized sources (guidelines, textbooks) outrank primary literature,
# which outranks single-case reports. Lower tier number = more valuable.
_KIND_TIER = {
    SourceKind.GUIDELINE: 0,
    SourceKind.TEXTBOOK: 0,
    SourceKind.JOURNAL_ARTICLE: 1,
    SourceKind.CASE_REPORT: 2,
    SourceKind.OTHER: 3,
}

_WS = re.compile(r"\s+")


def _norm_ws(text: str) -> str:
    return _WS.sub(" ", text).strip()


@dataclass(frozen=True)
class CorpusDocument:
    doc_id: str
    title: str
    source_kind: SourceKind
    publication_date: str  # ISO-8601 date
    paragraph: str
    snippet: str
    url_or_locator: str = ""

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if len(self.snippet) > SNIPPET_MAX_CHARS:
            raise ValueError(
                f"snippet exceeds {SNIPPET_MAX_CHARS} chars in {self.doc_id}"
            )
        if _norm_ws(self.snippet) not in _norm_ws(self.paragraph):
            raise ValueError(f"snippet is not an extract of paragraph in {self.doc_id}")


def make_snippet(paragraph: str, limit: int = 140) -> str:
    """Take a word-boundary prefix of the paragraph, at most `limit` chars."""
    text = _norm_ws(paragraph)
    if len(text) <= limit:
        return text
    cut = text.rfind(" ", 0, limit + 1)
    if cut <= 0:
        cut = limit
    return text[:cut]


def compare_sources(a: CorpusDocument, b: CorpusDocument) -> int:
    """Total order: source tier, then newer publication date, then doc_id.

    Returns negative when `a` should rank first.
    """
    ta, tb = _KIND_TIER[a.source_kind], _KIND_TIER[b.source_kind]
    if ta != tb:
        return -1 if ta < tb else 1
    if a.publication_date != b.publication_date:
        return -1 if a.publication_date > b.publication_date else 1
    if a.doc_id != b.doc_id:
        return -1 if a.doc_id < b.doc_id else 1
    return 0


source_order_key = cmp_to_key(compare_sources)


class CorpusStore:
    """Immutable after construction; safe for concurrent readers."""

    def __init__(self, documents=()):
        self._docs = {}
        for doc in documents:
            self.add(doc)

    def add(self, doc: CorpusDocument):
        if doc.doc_id in self._docs:
            raise DuplicateIdError(doc.doc_id)
        self._docs[doc.doc_id] = doc

    def get(self, doc_id: str) -> CorpusDocument:
        return self._docs[doc_id]

    def __contains__(self, doc_id):
        return doc_id in self._docs

    def __len__(self):
        return len(self._docs)

    def __iter__(self):
        # dict preserves insertion order
        return iter(self._docs.values())


def parse_corpus_line(line: str, line_no: int) -> CorpusDocument:
    try:
        obj = json.loads(line)
        return CorpusDocument(
            doc_id=obj["doc_id"],
            title=obj.get("title", ""),
            source_kind=SourceKind(obj["source_kind"]),
            publication_date=obj.get("publication_date", ""),
            paragraph=obj["paragraph"],
            snippet=obj["snippet"],
            url_or_locator=obj.get("url_or_locator", ""),
        )
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ParseError(f"bad corpus record: {exc}", position=line_no) from exc


def load_corpus(path) -> CorpusStore:
    """Load a line-delimited JSON corpus file; `#` lines are comments."""
    store = CorpusStore()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            store.add(parse_corpus_line(line, line_no))
    return store


def dump_corpus(store: CorpusStore, path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in store:
            fh.write(
                json.dumps(
                    {
                        "doc_id": doc.doc_id,
                        "title": doc.title,
                        "source_kind": doc.source_kind.value,
                        "publication_date": doc.publication_date,
                        "paragraph": doc.paragraph,
                        "snippet": doc.snippet,
                        "url_or_locator": doc.url_or_locator,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
