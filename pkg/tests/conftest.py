import random

import pytest

from examcoach.corpus import CorpusDocument, CorpusStore, SourceKind, make_snippet
from examcoach.ingest import LETTERS, ExamFile, ExamQuestion


def make_doc(doc_id, paragraph, kind=SourceKind.TEXTBOOK, date="2022-01-01",
             title=None, url=""):
    return CorpusDocument(
        doc_id=doc_id,
        title=title or f"Document {doc_id}",
        source_kind=kind,
        publication_date=date,
        paragraph=paragraph,
        snippet=make_snippet(paragraph),
        url_or_locator=url,
    )


def make_question(no, stem="Typowy objaw zawału serca to ból w klatce piersiowej",
                  correct="A", exam_id="internal-2024-fall", has_image=False,
                  invalidated=False):
    return ExamQuestion(
        exam_id=exam_id,
        question_no=no,
        stem=stem,
        choices=tuple((l, f"odpowiedź {l.lower()}{no}") for l in LETTERS),
        correct=correct,
        has_image=has_image,
        invalidated=invalidated,
        specialty="internal medicine",
        session="Fall 2024",
    )


def make_exam(n_questions=3, exam_id="internal-2024-fall", **kwargs):
    return ExamFile(
        exam_id=exam_id,
        specialty="internal medicine",
        session="Fall 2024",
        questions=tuple(make_question(i, exam_id=exam_id, **kwargs)
                        for i in range(1, n_questions + 1)),
    )


def random_corpus(rng: random.Random, n_docs: int, vocab_size: int = 40,
                  doc_len=(5, 60)) -> CorpusStore:
    vocab = [f"term{i}" for i in range(vocab_size)]
    store = CorpusStore()
    for i in range(n_docs):
        words = rng.choices(vocab, k=rng.randint(*doc_len))
        store.add(make_doc(f"d{i:03d}", " ".join(words)))
    return store


@pytest.fixture
def rng():
    return random.Random(20240917)
