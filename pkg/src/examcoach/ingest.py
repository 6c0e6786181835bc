"""Exam file ingestion.

Two source formats are supported and produce identical results for
equivalent content:

* a JSON layout mirroring what an OCR extraction step emits
  (test numbers, question text, five answer choices, the correct answer,
  and formatting flags), and
* a canonical HTML quiz markup with an answer-key table, plus a
  serializer for it so round-trip tests are possible.

Filtering (image questions, invalidated questions) is a separate step so
parsing stays lossless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from html.parser import HTMLParser

from .errors import ParseError, SchemaError

LETTERS = ("A", "B", "C", "D", "E")


class DropReason(Enum):
    IMAGE = "Image"
    INVALIDATED = "Invalidated"


@dataclass(frozen=True)
class ExamQuestion:
    exam_id: str
    question_no: int
    stem: str
    choices: tuple  # five (letter, text) pairs, letters A..E in order
    correct: str
    has_image: bool = False
    invalidated: bool = False
    specialty: str = ""
    session: str = ""

    def __post_init__(self):
        if self.question_no < 1:
            raise SchemaError("question_no must be positive", self.question_no)
        letters = tuple(letter for letter, _ in self.choices)
        if letters != LETTERS:
            raise SchemaError(
                f"expected choices A..E, got {letters}", self.question_no
            )
        if self.correct not in LETTERS:
            raise SchemaError(
                f"correct answer {self.correct!r} not in A..E", self.question_no
            )

    def choice_text(self, letter: str) -> str:
        return dict(self.choices)[letter]


@dataclass(frozen=True)
class ExamFile:
    exam_id: str
    specialty: str
    session: str
    questions: tuple

    def __post_init__(self):
        if not self.exam_id:
            raise SchemaError("exam_id must be non-empty")
        if not self.questions:
            raise SchemaError("exam has no questions")
        seen = set()
        for q in self.questions:
            if q.question_no in seen:
                raise SchemaError("duplicate question_no", q.question_no)
            seen.add(q.question_no)


def parse_exam_json(data: bytes) -> ExamFile:
    """Parse the OCR-style JSON exam format. Unknown fields are ignored."""
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", position=exc.pos) from exc
    if not isinstance(obj, dict) or "questions" not in obj:
        raise SchemaError("top-level object must carry a questions list")

    exam_id = obj.get("exam_id", "")
    specialty = obj.get("specialty", "")
    session = obj.get("session", "")
    questions = []
    for entry in obj["questions"]:
        qno = entry.get("test_no")
        if not isinstance(qno, int):
            raise SchemaError("missing or non-integer test_no", qno)
        answers = entry.get("answers")
        if not isinstance(answers, dict):
            raise SchemaError("missing answers object", qno)
        missing = [l for l in LETTERS if l not in answers]
        if missing:
            raise SchemaError(f"missing choices {missing}", qno)
        choices = tuple((l, str(answers[l])) for l in LETTERS)
        correct = entry.get("correct")
        if correct not in LETTERS:
            raise SchemaError(f"correct answer {correct!r} not in A..E", qno)
        questions.append(
            ExamQuestion(
                exam_id=exam_id,
                question_no=qno,
                stem=str(entry.get("question", "")),
                choices=choices,
                correct=correct,
                has_image=bool(entry.get("has_image", False)),
                invalidated=bool(entry.get("invalidated", False)),
                specialty=specialty,
                session=session,
            )
        )
    return ExamFile(exam_id, specialty, session, tuple(questions))


def exam_to_json(exam: ExamFile) -> str:
    """Serialize an ExamFile back to the canonical JSON format."""
    return json.dumps(
        {
            "exam_id": exam.exam_id,
            "specialty": exam.specialty,
            "session": exam.session,
            "questions": [
                {
                    "test_no": q.question_no,
                    "question": q.stem,
                    "answers": dict(q.choices),
                    "correct": q.correct,
                    "has_image": q.has_image,
                    "invalidated": q.invalidated,
                }
                for q in exam.questions
            ],
        },
        ensure_ascii=False,
        indent=2,
    )


# --- canonical quiz markup -------------------------------------------------
#
# <div class="exam" data-exam-id=".." data-specialty=".." data-session="..">
#   <div class="q" id="1" data-image="0" data-invalidated="0">
#     <p class="stem">...</p>
#     <ol class="ans"><li>..</li> x5 </ol>
#   </div>
#   ...
#   <table class="key"><tr><td>1</td><td>C</td></tr>...</table>
# </div>


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def exam_to_quiz_html(exam: ExamFile) -> str:
    """Render an ExamFile to the canonical quiz markup."""
    parts = [
        '<div class="exam" data-exam-id="{}" data-specialty="{}" '
        'data-session="{}">'.format(
            _escape(exam.exam_id), _escape(exam.specialty), _escape(exam.session)
        )
    ]
    for q in exam.questions:
        parts.append(
            '<div class="q" id="{}" data-image="{}" data-invalidated="{}">'.format(
                q.question_no, int(q.has_image), int(q.invalidated)
            )
        )
        parts.append(f'<p class="stem">{_escape(q.stem)}</p>')
        parts.append('<ol class="ans">')
        for _, text in q.choices:
            parts.append(f"<li>{_escape(text)}</li>")
        parts.append("</ol>")
        parts.append("</div>")
    parts.append('<table class="key">')
    for q in exam.questions:
        parts.append(f"<tr><td>{q.question_no}</td><td>{q.correct}</td></tr>")
    parts.append("</table>")
    parts.append("</div>")
    return "\n".join(parts)


class _QuizParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.exam_meta = None
        self.questions = []  # dicts: no, stem, choices[], has_image, invalidated
        self.key = {}
        self._q = None
        self._capture = None  # "stem" | "li" | "td"
        self._buf = []
        self._in_key = False
        self._row = []

    def handle_starttag(self, tag, attrs):
        attrs = dict(attrs)
        cls = attrs.get("class", "")
        if tag == "div" and cls == "exam":
            self.exam_meta = {
                "exam_id": attrs.get("data-exam-id", ""),
                "specialty": attrs.get("data-specialty", ""),
                "session": attrs.get("data-session", ""),
            }
        elif tag == "div" and cls == "q":
            if self._q is not None:
                raise ParseError("nested question block")
            try:
                qno = int(attrs["id"])
            except (KeyError, ValueError):
                raise ParseError("question block without numeric id")
            self._q = {
                "no": qno,
                "stem": "",
                "choices": [],
                "has_image": attrs.get("data-image", "0") == "1",
                "invalidated": attrs.get("data-invalidated", "0") == "1",
            }
        elif tag == "p" and cls == "stem":
            self._capture = "stem"
            self._buf = []
        elif tag == "li" and self._q is not None:
            self._capture = "li"
            self._buf = []
        elif tag == "table" and cls == "key":
            self._in_key = True
        elif tag == "tr" and self._in_key:
            self._row = []
        elif tag == "td" and self._in_key:
            self._capture = "td"
            self._buf = []

    def handle_endtag(self, tag):
        text = "".join(self._buf)
        if tag == "p" and self._capture == "stem":
            self._q["stem"] = text
            self._capture = None
        elif tag == "li" and self._capture == "li":
            self._q["choices"].append(text)
            self._capture = None
        elif tag == "td" and self._capture == "td":
            self._row.append(text.strip())
            self._capture = None
        elif tag == "tr" and self._in_key:
            if len(self._row) == 2:
                try:
                    self.key[int(self._row[0])] = self._row[1]
                except ValueError:
                    raise ParseError(f"bad answer-key row: {self._row}")
        elif tag == "table" and self._in_key:
            self._in_key = False
        elif tag == "div" and self._q is not None:
            self.questions.append(self._q)
            self._q = None

    def handle_data(self, data):
        if self._capture is not None:
            self._buf.append(data)


def parse_exam_quiz_html(data: bytes) -> ExamFile:
    """Parse the canonical quiz markup into an ExamFile.

    Correct answers come from the trailing answer-key table; every
    question must have a key row.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    parser = _QuizParser()
    parser.feed(text)
    parser.close()
    if parser._q is not None:
        raise ParseError("unclosed question block")
    if parser.exam_meta is None:
        raise ParseError("missing exam wrapper element")
    if not parser.questions:
        raise ParseError("no question blocks found")
    if len(parser.key) != len(parser.questions):
        raise SchemaError(
            f"answer key has {len(parser.key)} rows for "
            f"{len(parser.questions)} questions"
        )

    meta = parser.exam_meta
    questions = []
    for q in parser.questions:
        if q["no"] not in parser.key:
            raise SchemaError("question missing from answer key", q["no"])
        if len(q["choices"]) != 5:
            raise SchemaError(
                f"expected 5 choices, got {len(q['choices'])}", q["no"]
            )
        questions.append(
            ExamQuestion(
                exam_id=meta["exam_id"],
                question_no=q["no"],
                stem=q["stem"],
                choices=tuple(zip(LETTERS, q["choices"])),
                correct=parser.key[q["no"]],
                has_image=q["has_image"],
                invalidated=q["invalidated"],
                specialty=meta["specialty"],
                session=meta["session"],
            )
        )
    return ExamFile(meta["exam_id"], meta["specialty"], meta["session"], tuple(questions))


def filter_questions(exam: ExamFile):
    """Split questions into (kept, dropped-with-reason).

    Image questions are dropped before invalidated ones, so a
    doubly-flagged question reports a single deterministic reason.
    """
    kept, dropped = [], []
    for q in exam.questions:
        if q.has_image:
            dropped.append((q, DropReason.IMAGE))
        elif q.invalidated:
            dropped.append((q, DropReason.INVALIDATED))
        else:
            kept.append(q)
    return kept, dropped
