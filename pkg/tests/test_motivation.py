import itertools

import numpy as np
import pytest

from moocmetrics.errors import UnachievableStatus, WeekOutOfRange
from moocmetrics.eventstore import EventStore
from moocmetrics.logparse import EventKind
from moocmetrics.motivation import (
    BatteryRuleSet,
    activity_ratio_trend,
    battery_report,
    battery_week,
    current_week,
    tooltip,
)

from .conftest import Planter, make_course, plant_cohort_course

IMPLEMENTED = BatteryRuleSet("implemented")
PAPER = BatteryRuleSet("paper")


def plant_dimensions(p: Planter, user: str, week: int, *, login=False,
                     video=False, quiz=False, forum=False) -> None:
    p.student(user)
    if login:
        p.login(user, week=week)
    if video:
        p.play(user, week=week)
    if quiz:
        p.quiz(user, week=week)
    if forum:
        p.post(user, week=week)


def test_login_only_half_charge(planter, store):
    plant_dimensions(planter, "u1", 1, login=True)
    planter.flush()
    status = battery_week(store, "gol", "u1", 1, IMPLEMENTED)
    assert status.percent == 50
    assert status.dimensions == ["login"]


def test_login_quiz_post_full_charge(planter, store):
    plant_dimensions(planter, "u1", 1, login=True, quiz=True, forum=True)
    planter.flush()
    assert battery_week(store, "gol", "u1", 1, IMPLEMENTED).percent == 100


def test_no_events_zero(planter, store):
    planter.student("u1")
    planter.flush()
    assert battery_week(store, "gol", "u1", 1, IMPLEMENTED).percent == 0


def test_gate_no_login_means_zero(planter, store):
    plant_dimensions(planter, "u1", 1, video=True, quiz=True, forum=True)
    planter.flush()
    assert battery_week(store, "gol", "u1", 1, IMPLEMENTED).percent == 0


def test_implemented_mode_truth_table(tmp_path):
    """All 8 login/quiz/forum combinations match the deployed rules:
    nothing without login, else 50 + 25*quiz + 25*forum."""
    store = EventStore(tmp_path / "tt")
    p = Planter(store, make_course())
    combos = list(itertools.product((False, True), repeat=3))
    for i, (login, quiz, forum) in enumerate(combos):
        plant_dimensions(p, f"u{i}", 1, login=login, quiz=quiz, forum=forum)
    p.flush()
    for i, (login, quiz, forum) in enumerate(combos):
        expected = (50 + 25 * quiz + 25 * forum) if login else 0
        got = battery_week(store, "gol", f"u{i}", 1, IMPLEMENTED).percent
        assert got == expected, (login, quiz, forum)


def test_paper_mode_truth_table(tmp_path):
    """All 16 dimension combinations score 25 x (satisfied dimensions)."""
    store = EventStore(tmp_path / "tt16")
    p = Planter(store, make_course(battery_mode="paper"))
    combos = list(itertools.product((False, True), repeat=4))
    for i, (login, video, quiz, forum) in enumerate(combos):
        plant_dimensions(p, f"u{i}", 2, login=login, video=video, quiz=quiz,
                         forum=forum)
    p.flush()
    for i, combo in enumerate(combos):
        expected = 25 * sum(combo)
        assert battery_week(store, "gol", f"u{i}", 2, PAPER).percent == expected


def test_repeats_add_nothing(planter, store):
    planter.student("u1")
    for _ in range(5):
        planter.login("u1", week=1)
    for attempt in range(1, 5):
        planter.quiz("u1", attempt=attempt, week=1)
    planter.flush()
    assert battery_week(store, "gol", "u1", 1, IMPLEMENTED).percent == 75


def test_forum_qualifies_by_two_distinct_threads(planter, store):
    planter.student("same")
    planter.login("same", week=1)
    planter.read("same", thread="t1", week=1)
    planter.read("same", thread="t1", week=1)  # same thread again
    planter.student("two")
    planter.login("two", week=1)
    planter.read("two", thread="t1", week=1)
    planter.read("two", thread="t2", week=1)
    planter.flush()
    assert battery_week(store, "gol", "same", 1, IMPLEMENTED).percent == 50
    assert battery_week(store, "gol", "two", 1, IMPLEMENTED).percent == 75


def test_week_out_of_range(planter, store):
    planter.student("u1")
    planter.flush()
    with pytest.raises(WeekOutOfRange):
        battery_week(store, "gol", "u1", 0)
    with pytest.raises(WeekOutOfRange):
        battery_week(store, "gol", "u1", 9)


def test_status_describes_its_own_week(planter, store):
    planter.student("u1")
    planter.login("u1", week=3)
    planter.flush()
    assert battery_week(store, "gol", "u1", 3, IMPLEMENTED).percent == 50
    assert battery_week(store, "gol", "u1", 2, IMPLEMENTED).percent == 0
    # shown on the first day of week 4
    assert current_week(store, "gol", planter.at(4, 10)) == 3


def test_monotone_under_single_additions(planter, store):
    """Adding any single event never lowers the battery percent."""
    rng = np.random.default_rng(0)
    users = [f"u{i}" for i in range(20)]
    for u in users:
        planter.student(u)
    planter.flush()
    kinds = [
        lambda u, w: planter.login(u, week=w),
        lambda u, w: planter.read(u, thread=f"t{rng.integers(4)}", week=w),
        lambda u, w: planter.post(u, week=w),
        lambda u, w: planter.play(u, week=w),
        lambda u, w: planter.quiz(u, attempt=int(rng.integers(1, 6)),
                                  score=float(rng.integers(0, 101)), week=w),
    ]
    for rules in (IMPLEMENTED, PAPER):
        for _ in range(300):
            user = users[rng.integers(len(users))]
            week = int(rng.integers(1, 9))
            before = battery_week(store, "gol", user, week, rules).percent
            kinds[rng.integers(len(kinds))](user, week)
            planter.flush()
            after = battery_week(store, "gol", user, week, rules).percent
            assert after >= before


# ----------------------------------------------------------------- tooltips


def test_tooltip_texts_verbatim():
    assert tooltip(0, IMPLEMENTED) == (
        "No activity last week – we are looking forward to seeing you again "
        "this week!")
    assert tooltip(50, IMPLEMENTED) == (
        "Your activity last week is 50%. Good! Increase your activities to "
        "score better!")
    assert tooltip(75, IMPLEMENTED) == "Your activity last week is 75%. Great! Keep it up!"
    assert tooltip(100, IMPLEMENTED) == (
        "Your activity in the previous week is 100%. Congratulations. "
        "Your commitment is excellent. Keep it up!")


def test_tooltip_25_only_in_paper_mode():
    assert "25%" in tooltip(25, PAPER)
    with pytest.raises(UnachievableStatus):
        tooltip(25, IMPLEMENTED)


def test_achievable_sets():
    assert PAPER.achievable() == (0, 25, 50, 75, 100)
    assert IMPLEMENTED.achievable() == (0, 50, 75, 100)


# ------------------------------------------------------------------ reports


def test_report_all_inactive_week(planter, store):
    # three course-active students (they quizzed in week 1) with a dead week 2
    for u in ("a", "b", "c"):
        planter.student(u)
        planter.quiz(u, week=1)
    planter.flush()
    assert battery_report(store, "gol", 2, IMPLEMENTED) == {0: 3}


def test_report_everyone_login_quiz(planter, store):
    for u in ("a", "b", "c", "d"):
        planter.student(u)
        planter.login(u, week=3)
        planter.quiz(u, week=3)
    planter.flush()
    assert battery_report(store, "gol", 3, IMPLEMENTED) == {75: 4}


def test_report_sums_to_active_count(planter, store):
    from moocmetrics.cohort import categorize

    rng = np.random.default_rng(1)
    for i in range(30):
        u = f"u{i}"
        planter.student(u)
        if i % 3 != 0:  # two thirds become active
            planter.quiz(u, week=int(rng.integers(1, 9)))
        if i % 4 == 0:
            planter.login(u, week=2)
    planter.flush()
    dist = battery_report(store, "gol", 2, IMPLEMENTED)
    assert sum(dist.values()) == categorize(store, "gol").active


def test_gol2016_active_ratio(tmp_path):
    store = EventStore(tmp_path / "gol16")
    plant_cohort_course(store, "gol16", 284, 209, 60, 51)
    trend = activity_ratio_trend(store, "gol16")
    assert trend.registrants == 284
    assert trend.active == 209
    assert round(trend.overall_ratio, 1) == 73.6


def test_gol2014_active_ratio(tmp_path):
    store = EventStore(tmp_path / "gol14")
    plant_cohort_course(store, "gol14", 1012, 479, 217, 177)
    trend = activity_ratio_trend(store, "gol14")
    assert trend.overall_ratio == pytest.approx(47.33, abs=0.05)


def test_activity_ratio_empty_course(store):
    Planter(store, make_course())
    assert activity_ratio_trend(store, "gol").overall_ratio is None


def test_activity_ratio_per_week(planter, store):
    planter.student("u1")
    planter.student("u2")
    planter.quiz("u1", week=1)
    planter.quiz("u1", quiz="q2", week=2)
    planter.quiz("u2", quiz="q2", week=2)
    planter.flush()
    trend = activity_ratio_trend(store, "gol")
    assert trend.per_week[1] == pytest.approx(50.0)
    assert trend.per_week[2] == pytest.approx(100.0)
    assert trend.per_week[3] == 0.0
