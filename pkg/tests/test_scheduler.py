import random

import pytest
from hypothesis import given, settings, strategies as st

from examcoach.errors import ClockError, DomainError
from examcoach.scheduler import (
    EASE_FLOOR,
    Grade,
    RetentionThreshold,
    ReviewLog,
    ReviewState,
    apply_grade,
    due_queue,
    interval_for,
    next_due,
    retrievability,
    simulate,
)


class TestRetrievability:
    def test_fresh_review_is_certain(self):
        for s in (0.5, 1, 10, 365):
            assert retrievability(0, s) == 1.0

    def test_decays_to_target_at_stability(self):
        assert retrievability(10, 10) == pytest.approx(0.9, abs=1e-12)

    def test_double_stability_squares(self):
        assert retrievability(20, 10) == pytest.approx(0.81, abs=1e-12)

    def test_negative_elapsed_rejected(self):
        with pytest.raises(DomainError):
            retrievability(-1, 10)


# keep elapsed/stability small enough that 0.9**ratio stays above the
# smallest positive double; beyond that the curve flatlines at 0.0
_ELAPSED = st.floats(0.01, 1000)
_STABILITY = st.floats(1.0, 1000)


class TestRetrievabilityMonotonicity:
    @given(_ELAPSED, _STABILITY, st.floats(1.01, 5))
    def test_strictly_decreasing_in_elapsed(self, elapsed, stability, factor):
        assert retrievability(elapsed * factor, stability) < retrievability(
            elapsed, stability)

    @given(_ELAPSED, _STABILITY, st.floats(1.01, 5))
    def test_strictly_increasing_in_stability(self, elapsed, stability, factor):
        assert retrievability(elapsed, stability * factor) > retrievability(
            elapsed, stability)


class TestNextDue:
    def state(self, stability, last=100.0):
        return ReviewState("u", "i", stability_days=stability, ease=2.5,
                           last_review=last, due=0.0, reps=3)

    def test_default_target_is_identity(self):
        assert next_due(self.state(10)) == pytest.approx(110.0)

    def test_lower_target_doubles_interval(self):
        # 0.9^(t/10) = 0.81 at t = 20
        due = next_due(self.state(10), RetentionThreshold(0.81))
        assert due == pytest.approx(120.0)

    def test_higher_target_shortens_interval(self):
        import math

        due = next_due(self.state(1), RetentionThreshold(0.95))
        assert due - 100.0 == pytest.approx(math.log(0.95) / math.log(0.9))
        assert due - 100.0 == pytest.approx(0.4868, abs=1e-4)

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            RetentionThreshold(0.0)
        with pytest.raises(ValueError):
            RetentionThreshold(1.0)


def mature_state(stability=10.0, ease=2.5, reps=5, last=50.0):
    return ReviewState("u", "i", stability_days=stability, ease=ease,
                       last_review=last, due=last + stability, reps=reps,
                       history=((0.0, Grade.KNOW),) * reps)


class TestApplyGrade:
    def test_know_multiplies_by_ease(self):
        state = apply_grade(mature_state(10, 2.5), Grade.KNOW, 60.0)
        assert state.stability_days == pytest.approx(25.0)
        assert state.due == pytest.approx(85.0)
        assert state.reps == 6

    def test_dont_know_resets(self):
        state = apply_grade(mature_state(10, 2.5), Grade.DONT_KNOW, 60.0)
        assert state.stability_days == 1.0
        assert state.ease == pytest.approx(2.2)
        assert state.reps == 0

    def test_unsure_grows_mildly_and_dents_ease(self):
        state = apply_grade(mature_state(10, 2.5), Grade.UNSURE, 60.0)
        assert state.stability_days == pytest.approx(12.0)
        assert state.ease == pytest.approx(2.35)

    def test_seed_intervals(self):
        state = ReviewState.new("u", "i")
        state = apply_grade(state, Grade.KNOW, 1.0)
        assert state.stability_days == 1.0
        state = apply_grade(state, Grade.KNOW, 2.0)
        assert state.stability_days == 6.0
        state = apply_grade(state, Grade.KNOW, 8.0)
        assert state.stability_days == pytest.approx(15.0)

    def test_ease_floor(self):
        state = mature_state(ease=1.35)
        state = apply_grade(state, Grade.DONT_KNOW, 60.0)
        assert state.ease == EASE_FLOOR

    def test_clock_error(self):
        with pytest.raises(ClockError):
            apply_grade(mature_state(last=50.0), Grade.KNOW, 49.0)

    def test_history_append_only(self):
        state = mature_state()
        before = len(state.history)
        for grade in (Grade.KNOW, Grade.UNSURE, Grade.DONT_KNOW):
            updated = apply_grade(state, grade, 60.0)
            assert len(updated.history) == before + 1
            assert updated.history[:before] == state.history

    def test_invariants_never_break(self, rng):
        state = ReviewState.new("u", "i")
        now = 0.0
        for _ in range(300):
            now += rng.uniform(0, 30)
            grade = rng.choice(list(Grade))
            state = apply_grade(state, grade, now)
            assert state.stability_days > 0
            assert state.ease >= EASE_FLOOR


def random_reachable_state(rng, max_reviews=12):
    """States as they actually occur: produced by grade sequences."""
    state = ReviewState.new("u", "i")
    now = 0.0
    for _ in range(rng.randint(0, max_reviews)):
        now += rng.uniform(0.1, 40)
        state = apply_grade(state, rng.choice(list(Grade)), now)
    return state, now


class TestGradeMonotonicity:
    def test_better_grade_never_shorter_interval(self, rng):
        order = (Grade.DONT_KNOW, Grade.UNSURE, Grade.KNOW)
        for _ in range(2000):
            state, now = random_reachable_state(rng)
            now += rng.uniform(0, 30)
            intervals = [
                apply_grade(state, g, now).due - now for g in order
            ]
            assert intervals[0] <= intervals[1] + 1e-12
            assert intervals[1] <= intervals[2] + 1e-12


class TestDueQueue:
    def make(self, item, due, new=False):
        history = () if new else ((0.0, Grade.KNOW),)
        return ReviewState("u", item, stability_days=1.0, ease=2.5,
                           last_review=0.0, due=due, reps=0 if new else 1,
                           history=history)

    def test_nothing_due_serves_new_up_to_cap(self):
        states = [self.make(f"n{i}", 1.0, new=True) for i in range(5)]
        assert due_queue(states, now=0.5, daily_new_cap=3) == ["n0", "n1", "n2"]

    def test_due_order(self):
        states = [self.make("b", 2.0), self.make("a", 1.0)]
        assert due_queue(states, now=3.0) == ["a", "b"]

    def test_cap_zero_and_nothing_due(self):
        states = [self.make("n0", 1.0, new=True)]
        assert due_queue(states, now=0.0, daily_new_cap=0) == []

    def test_due_items_precede_new(self):
        states = [self.make("new1", 0.0, new=True), self.make("old1", 1.0)]
        assert due_queue(states, now=2.0) == ["old1", "new1"]

    def test_failed_item_is_due_not_new(self):
        state = ReviewState.new("u", "i")
        state = apply_grade(state, Grade.DONT_KNOW, 1.0)
        assert not state.is_new
        assert due_queue([state], now=state.due, daily_new_cap=0) == ["i"]


class TestSimulate:
    def test_always_know_intervals(self):
        trace = simulate(Grade.KNOW, days=30)
        assert [round(t[0], 2) for t in trace] == [1, 2, 8, 23]
        assert [t[2] for t in trace] == [1.0, 6.0, 15.0, 37.5]
        assert len(trace) == 4

    def test_always_dont_know_pins_interval(self):
        trace = simulate(Grade.DONT_KNOW, days=10)
        assert all(interval == 1.0 for _, _, interval in trace)
        assert len(trace) == 10

    def test_days_must_be_positive(self):
        with pytest.raises(DomainError):
            simulate(Grade.KNOW, days=0)

    def test_deterministic(self):
        assert simulate(Grade.UNSURE, days=20) == simulate(Grade.UNSURE, days=20)


class TestReviewLog:
    def test_replay_reconstructs_state(self, tmp_path):
        log = ReviewLog(tmp_path / "reviews.jsonl")
        state = ReviewState.new("u1", "q1", created=0.0)
        now = 0.0
        for grade in (Grade.KNOW, Grade.KNOW, Grade.UNSURE, Grade.KNOW):
            now = state.due
            state = apply_grade(state, grade, now)
            log.append("u1", "q1", grade, now)
        replayed = ReviewLog(tmp_path / "reviews.jsonl").replay()
        assert replayed[("u1", "q1")] == state

    def test_missing_file_is_empty(self, tmp_path):
        assert ReviewLog(tmp_path / "absent.jsonl").replay() == {}

    def test_multiple_users_and_items(self, tmp_path):
        log = ReviewLog(tmp_path / "reviews.jsonl")
        log.append("u1", "q1", Grade.KNOW, 1.0)
        log.append("u2", "q1", Grade.DONT_KNOW, 1.0)
        log.append("u1", "q2", Grade.UNSURE, 2.0)
        states = log.replay()
        assert set(states) == {("u1", "q1"), ("u2", "q1"), ("u1", "q2")}
        assert states[("u2", "q1")].reps == 0
