"""Human-evaluation framework: annotation records, agreement, aggregation.

Annotators score each question report on a 1-4 forced-choice scale across
several quality parameters, label each of the ten supplied documents as
completely/partially/ir-relevant, and may abstain only on prioritization
(when the sources never conflict there is nothing to prioritize).

Dual annotations are compared pairwise: identical ratings are total
agreement (TIAA), same-tendency ratings ({1,2} together or {3,4}
together, or complete-vs-partial relevance) are partial agreement (PIAA),
and ratings crossing the 2/3 boundary (or irrelevant-vs-relevant, or
disagreement about prioritization assessability) are discrepancies that a
third annotator settles. Only discrepant fields may be resolved; PIAA
fields keep both values and are averaged in aggregation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import AggregateError, IaaError, ResolutionError

ABSTAIN = "abstain"

SCORE_PARAMS = (
    "credibility",
    "accuracy",
    "logic",
    "completeness_depth",
    "conciseness",
    "communicativeness",
)
OPTIONAL_SCORE_PARAMS = ("sensitivity", "specificity")
DOC_COUNT = 10


class RelevanceLabel(Enum):
    COMPLETE = "Complete"
    PARTIAL = "Partial"
    IRRELEVANT = "Irrelevant"


class AgreementClass(Enum):
    TIAA = "TIAA"
    PIAA = "PIAA"
    DISCREPANCY = "Discrepancy"
    NOT_APPLICABLE = "NotApplicable"


def check_score(value) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value not in (1, 2, 3, 4):
        raise ValueError(f"score must be an integer in 1..4, got {value!r}")
    return value


@dataclass(frozen=True)
class AnnotationRecord:
    question_id: str
    annotator_id: str
    doc_labels: tuple  # exactly 10 RelevanceLabel
    credibility: int
    accuracy: int
    logic: int
    completeness_depth: int
    conciseness: int
    communicativeness: int
    prioritization: object  # int 1..4 or ABSTAIN
    sensitivity: int = None
    specificity: int = None

    def __post_init__(self):
        if len(self.doc_labels) != DOC_COUNT:
            raise ValueError(f"need exactly {DOC_COUNT} document labels")
        for label in self.doc_labels:
            if not isinstance(label, RelevanceLabel):
                raise ValueError(f"bad relevance label: {label!r}")
        for param in SCORE_PARAMS:
            check_score(getattr(self, param))
        if self.prioritization != ABSTAIN:
            check_score(self.prioritization)
        for param in OPTIONAL_SCORE_PARAMS:
            value = getattr(self, param)
            if value is not None:
                check_score(value)

    @property
    def complete_count(self) -> int:
        return sum(1 for l in self.doc_labels if l is RelevanceLabel.COMPLETE)

    @property
    def partial_count(self) -> int:
        return sum(1 for l in self.doc_labels if l is RelevanceLabel.PARTIAL)

    @property
    def total_relevant(self) -> int:
        return self.complete_count + self.partial_count


# --- pairwise agreement classification -------------------------------------

_LOW = {1, 2}


def classify_score_pair(a: int, b: int) -> AgreementClass:
    check_score(a)
    check_score(b)
    if a == b:
        return AgreementClass.TIAA
    if (a in _LOW) == (b in _LOW):
        return AgreementClass.PIAA
    return AgreementClass.DISCREPANCY


def classify_relevance_pair(a: RelevanceLabel, b: RelevanceLabel) -> AgreementClass:
    if a == b:
        return AgreementClass.TIAA
    if RelevanceLabel.IRRELEVANT in (a, b):
        return AgreementClass.DISCREPANCY
    return AgreementClass.PIAA  # Complete vs Partial


def classify_prioritization_pair(a, b) -> AgreementClass:
    a_abstain = a == ABSTAIN
    b_abstain = b == ABSTAIN
    if a_abstain and b_abstain:
        return AgreementClass.TIAA  # agreement that it was not assessable
    if a_abstain != b_abstain:
        return AgreementClass.DISCREPANCY
    return classify_score_pair(a, b)


# --- third-annotator resolution ---------------------------------------------


def _doc_field(i: int) -> str:
    return f"doc:{i}"


def _pair_fields(a: AnnotationRecord, b: AnnotationRecord):
    """Yield (field_name, value_a, value_b, classifier result)."""
    for param in SCORE_PARAMS:
        yield param, getattr(a, param), getattr(b, param), classify_score_pair(
            getattr(a, param), getattr(b, param)
        )
    for param in OPTIONAL_SCORE_PARAMS:
        va, vb = getattr(a, param), getattr(b, param)
        if va is not None and vb is not None:
            yield param, va, vb, classify_score_pair(va, vb)
    yield (
        "prioritization",
        a.prioritization,
        b.prioritization,
        classify_prioritization_pair(a.prioritization, b.prioritization),
    )
    for i in range(DOC_COUNT):
        yield (
            _doc_field(i),
            a.doc_labels[i],
            b.doc_labels[i],
            classify_relevance_pair(a.doc_labels[i], b.doc_labels[i]),
        )


@dataclass(frozen=True)
class ResolvedRecord:
    question_id: str
    scores: dict  # param -> float, or ABSTAIN for prioritization
    doc_complete: float
    doc_partial: float
    resolved_fields: tuple

    @property
    def doc_total(self) -> float:
        return self.doc_complete + self.doc_partial

    def final_values(self) -> dict:
        """Per-parameter final value for aggregation; abstentions excluded."""
        values = {k: v for k, v in self.scores.items() if v != ABSTAIN}
        values["doc_complete"] = self.doc_complete
        values["doc_partial"] = self.doc_partial
        values["doc_total"] = self.doc_total
        return values


def resolve(report, a: AnnotationRecord, b: AnnotationRecord,
            resolver: str, resolutions: dict = None) -> ResolvedRecord:
    """Merge a dual annotation, applying third-annotator resolutions.

    `resolutions` maps field name (a score parameter, "prioritization",
    or "doc:<i>") to the resolver's value. Every discrepant field needs a
    resolution; offering one for a non-discrepant field is an error, as
    is the resolver being one of the original annotators.
    """
    resolutions = dict(resolutions or {})
    if a.question_id != b.question_id:
        raise IaaError("annotation pair covers different questions")
    if report is not None and getattr(report, "comment", None) is not None:
        if report.comment.question_id != a.question_id:
            raise IaaError("report does not match annotation pair")
    if resolver in (a.annotator_id, b.annotator_id):
        raise ResolutionError(
            "resolver must not be one of the original annotators",
            reason=ResolutionError.SELF_RESOLVE,
        )

    classes = {}
    values = {}
    for name, va, vb, cls in _pair_fields(a, b):
        classes[name] = cls
        values[name] = (va, vb)

    for name in resolutions:
        if classes.get(name) != AgreementClass.DISCREPANCY:
            raise ResolutionError(
                f"field {name} is not in dispute",
                reason=ResolutionError.NOT_IN_DISPUTE,
                field=name,
            )
    missing = [
        name for name, cls in classes.items()
        if cls is AgreementClass.DISCREPANCY and name not in resolutions
    ]
    if missing:
        raise ResolutionError(
            f"discrepant fields lack a resolution: {missing}",
            reason=ResolutionError.MISSING,
            field=missing[0],
        )

    resolved_fields = tuple(sorted(resolutions))

    scores = {}
    for name, cls in classes.items():
        if name.startswith("doc:"):
            continue
        va, vb = values[name]
        if cls is AgreementClass.DISCREPANCY:
            final = resolutions[name]
            if name != "prioritization" or final != ABSTAIN:
                check_score(final)
            scores[name] = final if final == ABSTAIN else float(final)
        elif name == "prioritization" and va == ABSTAIN:
            scores[name] = ABSTAIN
        elif cls is AgreementClass.TIAA:
            scores[name] = float(va)
        else:  # PIAA: both stand; averaged for aggregation
            scores[name] = (va + vb) / 2.0

    complete = 0.0
    partial = 0.0
    for i in range(DOC_COUNT):
        name = _doc_field(i)
        la, lb = values[name]
        if classes[name] is AgreementClass.DISCREPANCY:
            final = resolutions[name]
            if not isinstance(final, RelevanceLabel):
                final = RelevanceLabel(final)
            la = lb = final
        for label in (la, lb):
            if label is RelevanceLabel.COMPLETE:
                complete += 0.5
            elif label is RelevanceLabel.PARTIAL:
                partial += 0.5

    return ResolvedRecord(
        question_id=a.question_id,
        scores=scores,
        doc_complete=complete,
        doc_partial=partial,
        resolved_fields=resolved_fields,
    )


# --- aggregation and reporting ----------------------------------------------


def aggregate(records) -> dict:
    """Mean and population standard deviation per parameter.

    `records` is a list of per-question value mappings (see
    ResolvedRecord.final_values); abstained parameters are simply absent
    and excluded from that parameter's statistics.
    """
    records = list(records)
    if not records:
        raise AggregateError("nothing to aggregate")
    params = {}
    for record in records:
        for name, value in record.items():
            params.setdefault(name, []).append(float(value))
    table = {}
    for name, vals in params.items():
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        table[name] = (mean, math.sqrt(var), len(vals))
    return table


def iaa_summary(pairs) -> dict:
    """Per-parameter TIAA/PIAA/discrepancy fractions over annotation pairs.

    Document relevance is classified per document, ten classifications per
    pair, reported under the single parameter "doc_relevance". Fractions
    are exact; rounding happens only in rendering.
    """
    pairs = list(pairs)
    if not pairs:
        raise IaaError("no annotation pairs")
    counts = {}
    for a, b in pairs:
        if a.question_id != b.question_id:
            raise IaaError(
                f"pair covers different questions: {a.question_id} vs {b.question_id}"
            )
        for name, _va, _vb, cls in _pair_fields(a, b):
            key = "doc_relevance" if name.startswith("doc:") else name
            bucket = counts.setdefault(
                key, {AgreementClass.TIAA: 0, AgreementClass.PIAA: 0,
                      AgreementClass.DISCREPANCY: 0}
            )
            bucket[cls] += 1
    summary = {}
    for name, bucket in counts.items():
        total = sum(bucket.values())
        summary[name] = {
            "tiaa": bucket[AgreementClass.TIAA] / total,
            "piaa": bucket[AgreementClass.PIAA] / total,
            "discrepancy": bucket[AgreementClass.DISCREPANCY] / total,
            "n": total,
        }
    return summary


_ROW_LABELS = [
    ("sensitivity", "Sensitivity (1-4)"),
    ("specificity", "Specificity (1-4)"),
    ("doc_complete", "Completely relevant docs (/10)"),
    ("doc_partial", "Partially relevant docs (/10)"),
    ("doc_total", "Relevant docs (/10)"),
    ("credibility", "Credibility (1-4)"),
    ("accuracy", "Accuracy (1-4)"),
    ("logic", "Logic (1-4)"),
    ("completeness_depth", "Completeness/Depth (1-4)"),
    ("conciseness", "Conciseness (1-4)"),
    ("communicativeness", "Communicativeness/Readability (1-4)"),
    ("prioritization", "Prioritization (1-4)"),
]

# agreement stats for the doc-count rows come from per-document labels
_IAA_KEY = {"doc_complete": None, "doc_partial": None, "doc_total": "doc_relevance"}


def render_table(aggregates: dict, iaa: dict = None) -> str:
    """Render the results table, one row per parameter:
    ``Parameter | mean ± std | TIAA% | PIAA%``."""
    lines = ["Parameter | Score | TIAA | PIAA"]
    lines.append("--- | --- | --- | ---")
    for key, label in _ROW_LABELS:
        if key not in aggregates:
            continue
        mean, std, _n = aggregates[key]
        row = f"{label} | {mean:.2f} ± {std:.2f}"
        iaa_key = _IAA_KEY.get(key, key)
        stats = (iaa or {}).get(iaa_key)
        if stats:
            row += f" | {round(stats['tiaa'] * 100)}% | {round(stats['piaa'] * 100)}%"
        else:
            row += " | - | -"
        lines.append(row)
    return "\n".join(lines)


def record_values(record: AnnotationRecord) -> dict:
    """Per-parameter values of a single annotation, for aggregation."""
    values = {}
    for param in SCORE_PARAMS:
        values[param] = float(getattr(record, param))
    for param in OPTIONAL_SCORE_PARAMS:
        if getattr(record, param) is not None:
            values[param] = float(getattr(record, param))
    if record.prioritization != ABSTAIN:
        values["prioritization"] = float(record.prioritization)
    values["doc_complete"] = float(record.complete_count)
    values["doc_partial"] = float(record.partial_count)
    values["doc_total"] = float(record.total_relevant)
    return values


# --- line-delimited JSON interchange ----------------------------------------


def record_to_dict(record: AnnotationRecord) -> dict:
    out = {
        "question_id": record.question_id,
        "annotator_id": record.annotator_id,
        "doc_labels": [l.value for l in record.doc_labels],
        "prioritization": record.prioritization,
    }
    for param in SCORE_PARAMS:
        out[param] = getattr(record, param)
    for param in OPTIONAL_SCORE_PARAMS:
        if getattr(record, param) is not None:
            out[param] = getattr(record, param)
    return out


def record_from_dict(obj: dict) -> AnnotationRecord:
    return AnnotationRecord(
        question_id=obj["question_id"],
        annotator_id=obj["annotator_id"],
        doc_labels=tuple(RelevanceLabel(l) for l in obj["doc_labels"]),
        prioritization=obj["prioritization"],
        sensitivity=obj.get("sensitivity"),
        specificity=obj.get("specificity"),
        **{param: obj[param] for param in SCORE_PARAMS},
    )


def load_annotations(path) -> list:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_dict(json.loads(line)))
    return records


def dump_annotations(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")
