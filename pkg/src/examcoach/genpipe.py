"""Question-to-comment generation pipeline.

Stages: rephrase the exam question into a concise search query, retrieve
and rerank candidate documents, assemble a grounded prompt around exactly
ten documents, call a pluggable text-generation provider, and validate
the citation markers in the result. A comment citing a document that was
not supplied is rejected outright, never repaired.

Prompt templates are versioned data files under ``templates/`` so they
can evolve without code changes.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from importlib import resources

from .corpus import CorpusStore
from .errors import CitationError, GenError, PipelineError
from .ingest import ExamQuestion
from .rerank import RerankMode, rerank
from .retrieval import AnalyzerConfig, InvertedIndex, analyze, expand_query, search

CITATION_MARKER = re.compile(r"\[doc:([^\]\s]+)\]")

_QUESTION_HEADER = "QUESTION:"
_CHOICES_HEADER = "CHOICES:"
_DOCUMENTS_HEADER = "DOCUMENTS:"


def load_template(name: str) -> str:
    return resources.files("examcoach.templates").joinpath(name).read_text("utf-8")


@dataclass
class GenParams:
    temperature: float = 0.0
    max_output_tokens: int = 1024
    seed: int = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class SearchQuery:
    question_id: str
    query_text: str
    difficulties: tuple = ()


@dataclass(frozen=True)
class GeneratedComment:
    question_id: str
    body: str
    citations: tuple  # doc ids in first-appearance order
    provider_meta: dict = field(default_factory=dict)


def question_id_of(question: ExamQuestion) -> str:
    return f"{question.exam_id}:{question.question_no}"


def _format_choices(question: ExamQuestion) -> str:
    return "\n".join(f"{letter}) {text}" for letter, text in question.choices)


class MockProvider:
    """Deterministic provider for tests and offline runs.

    For rephrase prompts it returns the stem's non-stopword tokens joined
    with spaces; for comment prompts it emits a short commentary citing
    the first three supplied documents.
    """

    name = "mock"

    def __init__(self, stopwords=frozenset()):
        self.stopwords = frozenset(stopwords)

    def generate(self, prompt: str, params: GenParams) -> str:
        if _DOCUMENTS_HEADER in prompt:
            return self._comment(prompt)
        return self._query(prompt)

    def _stem_of(self, prompt: str) -> str:
        start = prompt.index(_QUESTION_HEADER) + len(_QUESTION_HEADER)
        end = prompt.index(_CHOICES_HEADER, start)
        return prompt[start:end].strip()

    def _query(self, prompt: str) -> str:
        tokens = analyze(self._stem_of(prompt), AnalyzerConfig(stopwords=self.stopwords))
        return " ".join(tokens)

    def _comment(self, prompt: str) -> str:
        correct = re.search(r"^CORRECT: ([A-E])$", prompt, re.MULTILINE).group(1)
        docs_part = prompt[prompt.index(_DOCUMENTS_HEADER):]
        ids = []
        for m in CITATION_MARKER.finditer(docs_part):
            if m.group(1) not in ids:
                ids.append(m.group(1))
        cited = ids[:3]
        lines = [f"Odpowiedź {correct} jest prawidłowa."]
        for doc_id in cited:
            lines.append(f"Potwierdza to źródło [doc:{doc_id}].")
        return " ".join(lines)


class HttpProvider:
    """Adapter for a remote generation service speaking the wire contract:
    POST /generate {prompt, temperature, max_tokens, seed} -> {text}."""

    def __init__(self, base_url: str, model_name: str = "remote",
                 timeout: float = 60.0, client=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.name = model_name
        self._client = client or httpx.Client(timeout=timeout)

    def generate(self, prompt: str, params: GenParams) -> str:
        try:
            resp = self._client.post(
                self.base_url + "/generate",
                json={
                    "prompt": prompt,
                    "temperature": params.temperature,
                    "max_tokens": params.max_output_tokens,
                    "seed": params.seed,
                },
            )
            resp.raise_for_status()
            return resp.json()["text"]
        except Exception as exc:
            raise GenError(f"provider call failed: {exc}") from exc


def rephrase(question: ExamQuestion, provider,
             params: GenParams = GenParams()) -> SearchQuery:
    """Turn a multi-sentence exam item into one concise search query."""
    prompt = load_template("rephrase_v1.txt").format(
        stem=question.stem,
        choices=_format_choices(question),
        correct=question.correct,
    )
    try:
        text = provider.generate(prompt, params)
    except GenError:
        raise
    except Exception as exc:
        raise GenError(f"provider failed during rephrase: {exc}") from exc
    text = (text or "").strip()
    if not text:
        raise GenError("provider returned an empty query", reason=GenError.EMPTY_QUERY)
    return SearchQuery(question_id=question_id_of(question), query_text=text)


DOCS_PER_PROMPT = 10  # fixed by ablation: fewer degrades, more adds nothing


def build_prompt(question: ExamQuestion, docs) -> str:
    if len(docs) != DOCS_PER_PROMPT:
        raise PipelineError(
            f"need exactly {DOCS_PER_PROMPT} documents, got {len(docs)}",
            reason=PipelineError.DOC_COUNT,
        )
    doc_blocks = []
    for doc in docs:
        doc_blocks.append(f"[doc:{doc.doc_id}] {doc.title}\n{doc.paragraph}")
    return load_template("comment_v1.txt").format(
        stem=question.stem,
        choices=_format_choices(question),
        correct=question.correct,
        documents="\n\n".join(doc_blocks),
    )


def extract_citations(body: str) -> tuple:
    seen = []
    for match in CITATION_MARKER.finditer(body):
        if match.group(1) not in seen:
            seen.append(match.group(1))
    return tuple(seen)


def generate_comment(question: ExamQuestion, docs, provider,
                     params: GenParams = GenParams()) -> GeneratedComment:
    prompt = build_prompt(question, docs)
    try:
        body = provider.generate(prompt, params)
    except GenError:
        raise
    except Exception as exc:
        raise GenError(f"provider failed during generation: {exc}") from exc
    supplied = {doc.doc_id for doc in docs}
    citations = extract_citations(body)
    for doc_id in citations:
        if doc_id not in supplied:
            raise CitationError(doc_id)
    return GeneratedComment(
        question_id=question_id_of(question),
        body=body,
        citations=citations,
        provider_meta={
            "model": getattr(provider, "name", provider.__class__.__name__),
            "temperature": params.temperature,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
    )


@dataclass(frozen=True)
class QuestionReport:
    """What an annotator (and the UI) receives for one question."""

    question: ExamQuestion
    query: SearchQuery
    docs: tuple  # exactly 10 CorpusDocument, rerank order
    comment: GeneratedComment

    def to_dict(self) -> dict:
        return {
            "question_id": self.comment.question_id,
            "question": {
                "exam_id": self.question.exam_id,
                "question_no": self.question.question_no,
                "stem": self.question.stem,
                "choices": dict(self.question.choices),
                "correct": self.question.correct,
                "specialty": self.question.specialty,
                "session": self.question.session,
            },
            "query": self.query.query_text,
            "docs": [
                {
                    "doc_id": d.doc_id,
                    "title": d.title,
                    "source_kind": d.source_kind.value,
                    "publication_date": d.publication_date,
                    "snippet": d.snippet,
                    "paragraph": d.paragraph,
                    "url_or_locator": d.url_or_locator,
                }
                for d in self.docs
            ],
            "comment": self.comment.body,
            "citations": list(self.comment.citations),
            "provider_meta": self.comment.provider_meta,
        }


def report_from_dict(obj: dict) -> QuestionReport:
    from .corpus import SourceKind

    q = obj["question"]
    question = ExamQuestion(
        exam_id=q["exam_id"],
        question_no=q["question_no"],
        stem=q["stem"],
        choices=tuple((l, q["choices"][l]) for l in "ABCDE"),
        correct=q["correct"],
        specialty=q.get("specialty", ""),
        session=q.get("session", ""),
    )
    from .corpus import CorpusDocument

    docs = tuple(
        CorpusDocument(
            doc_id=d["doc_id"],
            title=d.get("title", ""),
            source_kind=SourceKind(d.get("source_kind", "Other")),
            publication_date=d.get("publication_date", ""),
            paragraph=d["paragraph"],
            snippet=d["snippet"],
            url_or_locator=d.get("url_or_locator", ""),
        )
        for d in obj["docs"]
    )
    comment = GeneratedComment(
        question_id=obj["question_id"],
        body=obj["comment"],
        citations=tuple(obj["citations"]),
        provider_meta=obj.get("provider_meta", {}),
    )
    query = SearchQuery(question_id=obj["question_id"], query_text=obj["query"])
    return QuestionReport(question=question, query=query, docs=docs, comment=comment)


def run_pipeline(question: ExamQuestion, index: InvertedIndex, store: CorpusStore,
                 mode: RerankMode, scorer, provider,
                 analyzer_config: AnalyzerConfig = AnalyzerConfig(),
                 params: GenParams = GenParams()) -> QuestionReport:
    """rephrase -> search(k=cap) -> rerank -> top 10 -> generate comment."""
    try:
        query = rephrase(question, provider, params)
    except GenError as exc:
        raise PipelineError(f"rephrase failed: {exc}", stage="rephrase") from exc

    terms = expand_query(analyze(query.query_text, analyzer_config), analyzer_config)
    candidates = search(index, terms, k=mode.candidate_cap)
    reranked = rerank(candidates, mode, scorer, query.query_text, store)
    if len(reranked) < DOCS_PER_PROMPT:
        raise PipelineError(
            f"only {len(reranked)} documents retrievable, need {DOCS_PER_PROMPT}",
            reason=PipelineError.DOC_COUNT,
            stage="retrieve",
        )
    docs = tuple(store.get(doc_id) for doc_id, _ in reranked[:DOCS_PER_PROMPT])
    comment = generate_comment(question, docs, provider, params)
    return QuestionReport(question=question, query=query, docs=docs, comment=comment)
