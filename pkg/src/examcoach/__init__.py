"""Exam-to-course platform: ingest multiple-choice exams, retrieve and
rerank supporting documents, generate citation-grounded commentary,
evaluate it with dual human annotation, and schedule reviews with a
forgetting-curve spaced-repetition algorithm."""

__version__ = "0.1.0"
