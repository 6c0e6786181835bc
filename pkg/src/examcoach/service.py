"""HTTP service: courses, learning sessions, annotation workflow.

Review progress is persisted as an append-only grade log; replaying the
log reconstructs identical scheduler state, so crash recovery is just a
replay. Each (user, item) episode follows a strict state machine
(shown -> answered -> revealed -> graded) enforced server-side; the
correct answer never leaves the server before an answer is submitted.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

from .corpus import CorpusDocument
from .errors import BuildError, IaaError, SessionError
from .evalkit import iaa_summary, record_from_dict, record_to_dict
from .genpipe import GeneratedComment
from .ingest import LETTERS
from .scheduler import Grade, RetentionThreshold, ReviewLog, ReviewState, apply_grade, due_queue


@dataclass(frozen=True)
class Course:
    course_id: str
    specialty: str
    session_years: tuple
    item_ids: tuple  # question ids
    questions: dict  # question_id -> ExamQuestion
    comments: dict  # question_id -> GeneratedComment
    doc_refs: dict  # doc_id -> CorpusDocument

    def __post_init__(self):
        missing = [qid for qid in self.item_ids if qid not in self.comments]
        if missing:
            raise BuildError(f"items without comments: {missing}", missing=missing)
        dangling = [
            doc_id
            for comment in self.comments.values()
            for doc_id in comment.citations
            if doc_id not in self.doc_refs
        ]
        if dangling:
            raise BuildError(f"citations to unknown documents: {dangling}",
                             missing=dangling)


def assemble_course(course_id: str, questions, reports) -> Course:
    """Bundle kept questions and their pipeline reports into a course.

    `reports` maps question_id -> QuestionReport. Every question must have
    a report; all cited documents come along as doc_refs.
    """
    questions = list(questions)
    by_id = {}
    for q in questions:
        by_id[f"{q.exam_id}:{q.question_no}"] = q
    missing = [qid for qid in by_id if qid not in reports]
    if missing:
        raise BuildError(f"questions without reports: {sorted(missing)}",
                         missing=sorted(missing))
    comments = {}
    doc_refs = {}
    for qid in by_id:
        report = reports[qid]
        comments[qid] = report.comment
        for doc in report.docs:
            doc_refs[doc.doc_id] = doc
    first = questions[0]
    return Course(
        course_id=course_id,
        specialty=first.specialty,
        session_years=tuple(sorted({q.session for q in questions})),
        item_ids=tuple(by_id),
        questions=by_id,
        comments=comments,
        doc_refs=doc_refs,
    )


# --- episode state machine ---------------------------------------------------

_SHOWN, _REVEALED = "shown", "revealed"


class SessionBook:
    """Tracks per-(user, item) episode phase and enforces event order."""

    def __init__(self):
        self._phase = {}
        self._lock = threading.Lock()

    def mark_shown(self, user, item):
        with self._lock:
            self._phase[(user, item)] = _SHOWN

    def mark_answered(self, user, item):
        with self._lock:
            if self._phase.get((user, item)) != _SHOWN:
                raise SessionError(
                    "answer submitted for an item that was not served",
                    reason=SessionError.OUT_OF_ORDER,
                )
            self._phase[(user, item)] = _REVEALED

    def mark_graded(self, user, item):
        with self._lock:
            if self._phase.get((user, item)) != _REVEALED:
                raise SessionError(
                    "grade submitted before the answer was revealed",
                    reason=SessionError.OUT_OF_ORDER,
                )
            del self._phase[(user, item)]


def days_now() -> float:
    return time.time() / 86400.0


class LearningService:
    """Application core behind the HTTP API; also usable directly."""

    def __init__(self, courses, data_dir, clock=days_now,
                 daily_new_cap: int = 20,
                 threshold: RetentionThreshold = RetentionThreshold(),
                 reports: dict = None):
        self.courses = {c.course_id: c for c in courses}
        self.clock = clock
        self.daily_new_cap = daily_new_cap
        self.threshold = threshold
        self.reports = dict(reports or {})
        os.makedirs(data_dir, exist_ok=True)
        self.log = ReviewLog(os.path.join(data_dir, "reviews.jsonl"))
        self.states = self.log.replay(threshold)
        self.sessions = SessionBook()
        self._annotations_path = os.path.join(data_dir, "annotations.jsonl")
        self.annotations = self._load_annotations()
        self._lock = threading.Lock()

    # -- helpers

    def _load_annotations(self):
        records = {}
        if os.path.exists(self._annotations_path):
            with open(self._annotations_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        record = record_from_dict(json.loads(line))
                        records.setdefault(record.question_id, []).append(record)
        return records

    def _find_item(self, item_id):
        for course in self.courses.values():
            if item_id in course.questions:
                return course, course.questions[item_id]
        raise KeyError(item_id)

    def _all_item_ids(self):
        for course in self.courses.values():
            yield from course.item_ids

    # -- learning session

    def session_next(self, user_id: str):
        """Head of the user's due queue, with the correct answer withheld."""
        now = self.clock()
        states = []
        for item_id in self._all_item_ids():
            state = self.states.get((user_id, item_id))
            if state is None:
                state = ReviewState.new(user_id, item_id, created=now)
            states.append(state)
        queue = due_queue(states, now, self.daily_new_cap)
        if not queue:
            return None
        item_id = queue[0]
        _course, question = self._find_item(item_id)
        self.sessions.mark_shown(user_id, item_id)
        return {
            "item_id": item_id,
            "stem": question.stem,
            "choices": dict(question.choices),
        }

    def session_answer(self, user_id: str, item_id: str, letter: str):
        """Record the answer and reveal correct letter, comment, and sources.

        The reveal is unconditional: wrong answers see exactly what right
        answers see.
        """
        if letter not in LETTERS:
            raise ValueError(f"letter must be one of {LETTERS}")
        course, question = self._find_item(item_id)
        self.sessions.mark_answered(user_id, item_id)
        comment = course.comments[item_id]
        sources = [
            {
                "doc_id": doc_id,
                "title": course.doc_refs[doc_id].title,
                "url_or_locator": course.doc_refs[doc_id].url_or_locator,
            }
            for doc_id in comment.citations
        ]
        return {
            "item_id": item_id,
            "chosen": letter,
            "correct": question.correct,
            "comment": comment.body,
            "sources": sources,
        }

    def session_grade(self, user_id: str, item_id: str, grade: Grade) -> float:
        self._find_item(item_id)
        self.sessions.mark_graded(user_id, item_id)
        now = self.clock()
        with self._lock:
            state = self.states.get((user_id, item_id))
            if state is None:
                state = ReviewState.new(user_id, item_id, created=now)
            state = apply_grade(state, grade, now, self.threshold)
            self.states[(user_id, item_id)] = state
            self.log.append(user_id, item_id, grade, now)
        return state.due

    # -- annotation workflow

    def add_annotation(self, question_id: str, record_obj: dict):
        record_obj = dict(record_obj)
        record_obj["question_id"] = question_id
        record = record_from_dict(record_obj)
        with self._lock:
            self.annotations.setdefault(question_id, []).append(record)
            with open(self._annotations_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")
        return record

    def iaa(self):
        pairs = [
            (records[0], records[1])
            for records in self.annotations.values()
            if len(records) >= 2
        ]
        if not pairs:
            raise IaaError("no dual-annotated questions yet")
        return iaa_summary(pairs)


def create_app(service: LearningService):
    from fastapi import Body, FastAPI, HTTPException, Response

    app = FastAPI(title="examcoach")
    prefix = "/api/v1"

    @app.get(prefix + "/courses")
    def list_courses():
        return [
            {
                "course_id": c.course_id,
                "specialty": c.specialty,
                "session_years": list(c.session_years),
                "item_count": len(c.item_ids),
            }
            for c in service.courses.values()
        ]

    @app.get(prefix + "/courses/{course_id}")
    def get_course(course_id: str):
        course = service.courses.get(course_id)
        if course is None:
            raise HTTPException(404, "unknown course")
        return {
            "course_id": course.course_id,
            "specialty": course.specialty,
            "session_years": list(course.session_years),
            "item_ids": list(course.item_ids),
        }

    @app.post(prefix + "/users/{user_id}/next")
    def next_item(user_id: str):
        payload = service.session_next(user_id)
        if payload is None:
            return Response(status_code=204)
        return payload

    @app.post(prefix + "/users/{user_id}/items/{item_id}/answer")
    def answer(user_id: str, item_id: str, body: dict = Body(...)):
        letter = body.get("letter")
        try:
            return service.session_answer(user_id, item_id, letter)
        except SessionError as exc:
            raise HTTPException(409, str(exc))
        except KeyError:
            raise HTTPException(404, "unknown item")
        except ValueError as exc:
            raise HTTPException(422, str(exc))

    @app.post(prefix + "/users/{user_id}/items/{item_id}/grade")
    def grade(user_id: str, item_id: str, body: dict = Body(...)):
        try:
            grade_value = Grade(body.get("grade"))
        except ValueError:
            raise HTTPException(422, "grade must be dont_know|unsure|know")
        try:
            due = service.session_grade(user_id, item_id, grade_value)
        except SessionError as exc:
            raise HTTPException(409, str(exc))
        except KeyError:
            raise HTTPException(404, "unknown item")
        return {"item_id": item_id, "due": due}

    @app.get(prefix + "/reports/{question_id}")
    def get_report(question_id: str):
        report = service.reports.get(question_id)
        if report is None:
            raise HTTPException(404, "unknown report")
        return report

    @app.post(prefix + "/reports/{question_id}/annotations")
    def post_annotation(question_id: str, body: dict = Body(...)):
        if question_id not in service.reports:
            raise HTTPException(404, "unknown report")
        try:
            record = service.add_annotation(question_id, body)
        except (ValueError, KeyError) as exc:
            raise HTTPException(422, f"invalid annotation: {exc}")
        return {"stored": True, "annotator_id": record.annotator_id}

    @app.get(prefix + "/iaa/summary")
    def iaa():
        try:
            summary = service.iaa()
        except IaaError as exc:
            raise HTTPException(404, str(exc))
        return summary

    return app


def load_config(path) -> dict:
    """key=value config file; blank lines and # comments ignored."""
    config = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, value = line.split("=", 1)
            config[key.strip()] = value.strip()
    return config
