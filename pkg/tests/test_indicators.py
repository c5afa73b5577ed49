import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moocmetrics.errors import (
    AttemptLimitExceeded,
    DegenerateInput,
    NoObservations,
    UnknownUser,
    UnknownVideo,
)
from moocmetrics.indicators import (
    activity_profile,
    engagement_vector,
    hourly_rhythm,
    pearson,
    quiz_summary,
    reaction_delay_stats,
    tukey_quartiles,
    video_retention,
    weekly_indicators,
)
from moocmetrics.logparse import EventKind

from .conftest import Planter, make_course


# ----------------------------------------------------------------- weekly


def test_weekly_zero_user(planter, store):
    planter.student("idle")
    planter.flush()
    rows = weekly_indicators(store, "gol", "idle")
    assert len(rows) == planter.cfg.duration_weeks + 2  # weeks 0..duration+1
    assert all(r.total() == 0 for r in rows)


def test_weekly_counts_by_week(planter, store):
    planter.student("u1")
    planter.login("u1", week=1)
    planter.login("u1", week=1)
    planter.quiz("u1", week=2)
    planter.flush()
    rows = weekly_indicators(store, "gol", "u1")
    assert rows[1].logins == 2
    assert rows[2].quiz_attempts == 1
    assert sum(r.total() for r in rows) == 3


def test_weekly_unknown_user(planter, store):
    planter.flush()
    with pytest.raises(UnknownUser):
        weekly_indicators(store, "gol", "ghost")


def test_weekly_sums_match_engagement_vector(planter, store):
    planter.student("u1")
    for week in (1, 2, 5):
        planter.read("u1", thread=f"t{week}", week=week)
    planter.post("u1", week=3)
    planter.quiz("u1", week=4)
    planter.flush()
    rows = weekly_indicators(store, "gol", "u1")
    vec = engagement_vector(store, "gol", "u1")
    assert sum(r.forum_reads for r in rows) == vec.reading_freq == 3
    assert sum(r.forum_posts for r in rows) == vec.writing_freq == 1
    assert sum(r.quiz_attempts for r in rows) == vec.quiz_attempts == 1


# ------------------------------------------------------------- engagement


def test_engagement_zero(planter, store):
    planter.student("idle")
    planter.flush()
    vec = engagement_vector(store, "gol", "idle")
    assert (vec.reading_freq, vec.writing_freq, vec.videos_watched,
            vec.quiz_attempts) == (0, 0, 0, 0)


def test_videos_watched_distinct(planter, store):
    planter.student("u1")
    for video, pos in (("v1", 0), ("v1", 10), ("v2", 0), ("v3", 0), ("v3", 9)):
        planter.play("u1", video=video, pos=pos)
    planter.flush()
    assert engagement_vector(store, "gol", "u1").videos_watched == 3
    assert engagement_vector(store, "gol", "u1", video_counting="events").videos_watched == 5


# ----------------------------------------------------------------- profile


@pytest.fixture
def stem_store(tmp_path):
    """STEM-shaped course: 27 pupils, 242 public, 18 certified of which 5
    are pupils, and 168 pupil quiz trials."""
    from moocmetrics.eventstore import EventStore

    store = EventStore(tmp_path / "stem")
    p = Planter(store, make_course(course_id="stem", weeks=10, threshold=75))
    for i in range(27):
        p.student(f"pupil{i:02d}", **{"class": "pupil"})
    for i in range(242):
        p.student(f"pub{i:03d}", **{"class": "public"})
    # 168 trials over 27 pupils: six each (5 on q1, 1 on q2), plus 6 extra
    trials = 0
    for i in range(27):
        uid = f"pupil{i:02d}"
        for attempt in range(1, 6):
            p.quiz(uid, quiz="q1", attempt=attempt, score=80, week=1 + i % 10)
            trials += 1
        p.quiz(uid, quiz="q2", attempt=1, score=80, week=2)
        trials += 1
    for i in range(6):
        p.quiz(f"pupil{i:02d}", quiz="q2", attempt=2, score=85, week=3)
        trials += 1
    assert trials == 168
    for i in range(5):
        p.certificate(f"pupil{i:02d}")
    for i in range(13):
        p.certificate(f"pub{i:03d}")
    p.flush()
    return store


def test_activity_profile_stem_annotations(stem_store):
    profile = activity_profile(stem_store, "stem")
    assert profile.class_size("pupil") == 27
    assert profile.class_size("public") == 242
    assert len(profile.certified) == 18
    assert profile.certified_in_class("pupil") == 5


def test_activity_profile_pupil_trials(stem_store):
    profile = activity_profile(stem_store, "stem")
    assert profile.activity_total("quiz_trials", "pupil") == 168
    assert profile.mean_per_student("quiz_trials", "pupil") == pytest.approx(6.22, abs=0.01)


def test_activity_profile_empty_course(store):
    Planter(store, make_course())  # registers course, no students
    profile = activity_profile(store, "gol")
    assert profile.users == []
    assert profile.counts == {}


# ------------------------------------------------------------------- quiz


def test_quiz_best_of(planter, store):
    planter.student("u1")
    for attempt, score in enumerate((60, 80, 75), start=1):
        planter.quiz("u1", attempt=attempt, score=score)
    planter.flush()
    (summary,) = quiz_summary(store, "gol", "u1")
    assert summary.recorded == 80
    assert summary.passed  # threshold 50, best-of rule


def test_quiz_single_fail(planter, store):
    planter.student("u1")
    planter.quiz("u1", score=40)
    planter.flush()
    (summary,) = quiz_summary(store, "gol", "u1")
    assert summary.recorded == 40
    assert not summary.passed


def test_quiz_pass_rule_modes(tmp_path):
    """Attempts [70, 80] at threshold 75: best-of passes (recorded 80 >= 75),
    strict fails (first attempt 70 < 75). Both modes enumerated by hand."""
    from moocmetrics.eventstore import EventStore

    for rule, expected in (("best_of", True), ("strict", False)):
        store = EventStore(tmp_path / rule)
        p = Planter(store, make_course(course_id="gadi", threshold=75, pass_rule=rule))
        p.student("u1")
        p.quiz("u1", attempt=1, score=70)
        p.quiz("u1", attempt=2, score=80)
        p.flush()
        (summary,) = quiz_summary(store, "gadi", "u1")
        assert summary.recorded == 80
        assert summary.passed is expected


def test_quiz_attempt_limit(planter, store):
    planter.student("u1")
    for attempt in range(1, 7):
        planter.quiz("u1", attempt=min(attempt, 5), score=50 + attempt)
    planter.flush()
    with pytest.raises(AttemptLimitExceeded):
        quiz_summary(store, "gol", "u1")


def test_quiz_recorded_is_max_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        scores = rng.integers(0, 101, size=rng.integers(1, 6)).tolist()
        assert max(scores) == sorted(scores)[-1]  # oracle for the rule below


# -------------------------------------------------------------- retention


def test_retention_all_reach_end(planter, store):
    for u in ("a", "b", "c"):
        planter.play(u, pos=0)
        planter.pause(u, pos=100)
    planter.flush()
    curve = video_retention(store, "gol", "v1", granularity="second")
    assert curve.watchers_at[0] == 3
    assert all(w == 3 for w in curve.watchers_at)
    assert curve.drop_ratio_at[-1] == 1.0
    assert sum(curve.drop_ratio_at) == pytest.approx(1.0)


def test_retention_one_drops_half_way(planter, store):
    planter.play("a", pos=0)
    planter.pause("a", pos=100)
    planter.play("b", pos=0)
    planter.pause("b", pos=100)
    planter.play("c", pos=0)
    planter.pause("c", pos=50)
    planter.flush()
    curve = video_retention(store, "gol", "v1", granularity="percent")
    # hand count: departures at 50% = 1 viewer of 3
    assert curve.drop_ratio_at[curve.positions.index(50)] == pytest.approx(1 / 3)
    assert curve.watchers_at[curve.positions.index(51)] == 2
    # non-increasing watchers
    assert all(a >= b for a, b in zip(curve.watchers_at, curve.watchers_at[1:]))


def test_retention_replay_views_exceed_watchers(planter, store):
    planter.play("a", pos=0)
    planter.pause("a", pos=100)
    planter.play("a", pos=30)  # rewind and replay the 30..100 segment
    planter.flush()
    curve = video_retention(store, "gol", "v1", granularity="second")
    segment = [i for i, p in enumerate(curve.positions) if p >= 30]
    assert all(curve.views_at[i] > curve.watchers_at[i] for i in segment)
    assert all(v >= w for v, w in zip(curve.views_at, curve.watchers_at))


def test_retention_unknown_video(planter, store):
    planter.flush()
    with pytest.raises(UnknownVideo):
        video_retention(store, "gol", "vX")


# ----------------------------------------------------------------- delays


def test_tukey_quartiles_hand_cases():
    assert tukey_quartiles([10, 15, 20]) == (12.5, 15, 17.5)
    assert tukey_quartiles([7]) == (7, 7, 7)
    assert tukey_quartiles([1, 2, 3, 4]) == (1.5, 2.5, 3.5)


def test_reaction_delay_groups(planter, store):
    for delay in (14, 15, 16):
        planter.quiz("cert", quiz="q1", attempt=1, score=90, week=4,
                     delay_seconds=delay)
    for delay in (12, 13, 14):
        planter.quiz("drop", quiz="q2", attempt=1, score=20, week=4,
                     delay_seconds=delay)
    planter.certificate("cert")
    planter.flush()
    stats = reaction_delay_stats(store, "gol", week=4)
    assert stats["certified"].median == 15
    assert stats["non_certified"].median == 13
    assert stats["certified"].median - stats["non_certified"].median == 2


def test_reaction_delay_cap(planter, store):
    planter.quiz("u1", attempt=1, score=50, delay_seconds=10)
    planter.quiz("u1", attempt=2, score=50, delay_seconds=90)  # over 60 s cap
    planter.flush()
    stats = reaction_delay_stats(store, "gol")
    assert stats["non_certified"].n == 1
    assert stats["non_certified"].excluded_over_cap == 1


def test_reaction_delay_no_observations(planter, store):
    planter.login("u1")
    planter.flush()
    with pytest.raises(NoObservations):
        reaction_delay_stats(store, "gol")


# ------------------------------------------------------------------ rhythm


def test_hourly_rhythm_single_bucket(planter, store):
    for i in range(5):
        e = planter.login("u1", week=1)
    # all planted seconds fall within hour 0 of the start day
    planter.flush()
    buckets = hourly_rhythm(store, "gol")
    assert buckets[0] == 5
    assert sum(buckets) == 5


def test_hourly_rhythm_empty(planter, store):
    planter.flush()
    assert hourly_rhythm(store, "gol") == [0] * 24


def test_hourly_rhythm_uses_course_tz(tmp_path):
    from moocmetrics.eventstore import EventStore

    store = EventStore(tmp_path / "tz")
    p = Planter(store, make_course(tz_offset_minutes=60))
    p.login("u1")  # 00:00 UTC -> 01:00 course-local
    p.flush()
    assert hourly_rhythm(store, "gol")[1] == 1


def test_hourly_rhythm_conserves_total(planter, store):
    rng = np.random.default_rng(3)
    for i in range(50):
        planter.event("u1", EventKind.FORUM_READ, week=int(rng.integers(1, 9)),
                      thread_id=f"t{i}")
    planter.flush()
    assert sum(hourly_rhythm(store, "gol")) == 50


# ----------------------------------------------------------------- pearson


def test_pearson_identity():
    assert pearson([1, 2, 3], [1, 2, 3]).r == pytest.approx(1.0)


def test_pearson_antisymmetry():
    assert pearson([1, 2, 3], [3, 2, 1]).r == pytest.approx(-1.0)


def test_pearson_hand_computed():
    # covariance 4, variances 5 and 5 -> r = 4/5
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]).r == pytest.approx(0.8, abs=1e-9)


def test_pearson_fisher_ci():
    rng = np.random.default_rng(42)
    n = 800
    x = rng.normal(size=n)
    y = 0.52 * x + math.sqrt(1 - 0.52 ** 2) * rng.normal(size=n)
    result = pearson(x.tolist(), y.tolist())
    lo, hi = result.ci95
    assert lo < result.r < hi
    assert hi - lo == pytest.approx(
        math.tanh(math.atanh(result.r) + 1.96 / math.sqrt(n - 3))
        - math.tanh(math.atanh(result.r) - 1.96 / math.sqrt(n - 3)))


@pytest.mark.parametrize("xs,ys", [
    ([1, 2], [1, 2]),          # too short
    ([1, 2, 3], [1, 2]),       # length mismatch
    ([1, 1, 1], [1, 2, 3]),    # constant
])
def test_pearson_degenerate(xs, ys):
    with pytest.raises(DegenerateInput):
        pearson(xs, ys)


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_pearson_properties(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 40))
    x = rng.normal(size=n)
    y = rng.normal(size=n)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return
    r = pearson(x.tolist(), y.tolist()).r
    assert -1.0 <= r <= 1.0
    # symmetry
    assert pearson(y.tolist(), x.tolist()).r == pytest.approx(r)
    # affine invariance with positive slope, sign flip with negative
    assert pearson((2.5 * x + 3).tolist(), y.tolist()).r == pytest.approx(r)
    assert pearson((-1.5 * x).tolist(), y.tolist()).r == pytest.approx(-r)
