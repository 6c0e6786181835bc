"""Spaced-repetition scheduling.

The forgetting curve is parameterized as R = 0.9^(t/S), so an item's
stability S is literally the interval after which estimated recall drops
to the 90% retention target; a repetition is due exactly when recall
would fall below the target. Grades use the three-level recall scale
(don't know / unsure / know) and drive an SM-2-style update of stability
and ease, with the classic 1-day and 6-day seed intervals for the first
two successful reviews.

Time is a plain float of days since an arbitrary epoch and is always
passed in, never read from a wall clock, so replays are deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ClockError, DomainError

EASE_DEFAULT = 2.5
EASE_FLOOR = 1.3
SEED_INTERVALS = (1.0, 6.0)
UNSURE_GROWTH = 1.2
UNSURE_EASE_PENALTY = 0.15
FAIL_EASE_PENALTY = 0.30
DECAY_BASE = 0.9  # recall level that defines stability


class Grade(Enum):
    DONT_KNOW = "dont_know"
    UNSURE = "unsure"
    KNOW = "know"


_GRADE_ORDER = {Grade.DONT_KNOW: 0, Grade.UNSURE: 1, Grade.KNOW: 2}


@dataclass(frozen=True)
class RetentionThreshold:
    r_target: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.r_target < 1.0:
            raise ValueError("r_target must be in (0, 1)")


@dataclass(frozen=True)
class ReviewState:
    user_id: str
    item_id: str
    stability_days: float
    ease: float
    last_review: float  # days since epoch
    due: float
    reps: int
    history: tuple = ()  # (timestamp, Grade) pairs

    def __post_init__(self):
        if self.stability_days <= 0:
            raise ValueError("stability must be positive")
        if self.ease < EASE_FLOOR:
            raise ValueError(f"ease must be >= {EASE_FLOOR}")

    @property
    def is_new(self) -> bool:
        return not self.history

    @classmethod
    def new(cls, user_id: str, item_id: str, created: float = 0.0) -> "ReviewState":
        return cls(
            user_id=user_id,
            item_id=item_id,
            stability_days=SEED_INTERVALS[0],
            ease=EASE_DEFAULT,
            last_review=created,
            due=created + SEED_INTERVALS[0],
            reps=0,
        )


def retrievability(elapsed_days: float, stability_days: float) -> float:
    """Estimated recall probability after `elapsed_days`; R(S, S) = 0.9."""
    if elapsed_days < 0:
        raise DomainError("elapsed time must be non-negative")
    if stability_days <= 0:
        raise DomainError("stability must be positive")
    return DECAY_BASE ** (elapsed_days / stability_days)


def interval_for(stability_days: float,
                 threshold: RetentionThreshold = RetentionThreshold()) -> float:
    """Days until recall decays to the retention target."""
    return stability_days * math.log(threshold.r_target) / math.log(DECAY_BASE)


def next_due(state: ReviewState,
             threshold: RetentionThreshold = RetentionThreshold()) -> float:
    return state.last_review + interval_for(state.stability_days, threshold)


def apply_grade(state: ReviewState, grade: Grade, now: float,
                threshold: RetentionThreshold = RetentionThreshold()) -> ReviewState:
    """Update memory state after a review.

    Know multiplies stability by ease (after the 1d/6d seed intervals);
    Unsure grows stability mildly and dents ease; DontKnow resets to the
    1-day seed and drops ease harder. Seed intervals apply to any passing
    grade so a better grade can never schedule a shorter interval.
    """
    if now < state.last_review:
        raise ClockError("review timestamp precedes last review")

    ease = state.ease
    if grade is Grade.KNOW:
        if state.reps == 0:
            stability = SEED_INTERVALS[0]
        elif state.reps == 1:
            stability = SEED_INTERVALS[1]
        else:
            stability = state.stability_days * ease
        reps = state.reps + 1
    elif grade is Grade.UNSURE:
        if state.reps == 0:
            stability = SEED_INTERVALS[0]
        else:
            stability = max(state.stability_days, state.stability_days * UNSURE_GROWTH)
        ease = max(EASE_FLOOR, ease - UNSURE_EASE_PENALTY)
        reps = state.reps + 1
    elif grade is Grade.DONT_KNOW:
        stability = SEED_INTERVALS[0]
        ease = max(EASE_FLOOR, ease - FAIL_EASE_PENALTY)
        reps = 0
    else:
        raise DomainError(f"unknown grade: {grade!r}")

    updated = replace(
        state,
        stability_days=stability,
        ease=ease,
        last_review=now,
        due=0.0,  # placeholder, recomputed below
        reps=reps,
        history=state.history + ((now, grade),),
    )
    return replace(updated, due=next_due(updated, threshold))


def due_queue(states, now: float, daily_new_cap: int = 20) -> list:
    """Item ids to review now: due items by due date, then new items.

    New items (never graded) are appended after the due backlog, capped
    per day. Ties break by item_id for reproducibility.
    """
    due = sorted(
        (s for s in states if not s.is_new and s.due <= now),
        key=lambda s: (s.due, s.item_id),
    )
    fresh = sorted((s for s in states if s.is_new), key=lambda s: s.item_id)
    return [s.item_id for s in due] + [s.item_id for s in fresh[:daily_new_cap]]


def simulate(policy, days: int, threshold: RetentionThreshold = RetentionThreshold()):
    """Replay a single-item virtual learner for `days` days.

    `policy` is a Grade or a callable (review_index -> Grade). The item is
    introduced on day 0 and first reviewed when its seed interval elapses.
    Returns a list of (day, grade, interval_after) per review performed.
    """
    if days < 1:
        raise DomainError("days must be >= 1")
    grade_at = policy if callable(policy) else (lambda i: policy)
    state = ReviewState.new("sim", "item", created=0.0)
    trace = []
    review_no = 0
    while state.due <= days:
        now = state.due
        grade = grade_at(review_no)
        state = apply_grade(state, grade, now, threshold)
        trace.append((now, grade, state.due - state.last_review))
        review_no += 1
        if grade is Grade.DONT_KNOW and len(trace) > 10 * days:
            break  # failing learner reviews daily; avoid unbounded loops
    return trace


# --- event-log persistence ---------------------------------------------------


class ReviewLog:
    """Append-only grade log; replaying it reconstructs identical state."""

    def __init__(self, path):
        self.path = path

    def append(self, user_id: str, item_id: str, grade: Grade, now: float):
        event = {"user": user_id, "item": item_id, "grade": grade.value, "t": now}
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()

    def replay(self, threshold: RetentionThreshold = RetentionThreshold()) -> dict:
        """Rebuild {(user_id, item_id): ReviewState} from the log."""
        states = {}
        try:
            fh = open(self.path, encoding="utf-8")
        except FileNotFoundError:
            return states
        with fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                key = (event["user"], event["item"])
                state = states.get(key)
                if state is None:
                    state = ReviewState.new(event["user"], event["item"],
                                            created=event["t"])
                states[key] = apply_grade(
                    state, Grade(event["grade"]), event["t"], threshold
                )
        return states
