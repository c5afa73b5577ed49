"""Weekly activity-battery scoring with gamified feedback texts.

Two rule sets are shipped because the designed framework and the deployed
one diverge (video logging broke in deployment, so the shipped variant has
no 25% status and folds the video share into login):

* paper mode — four dimensions (login, video, quiz, forum), 25% each;
  statuses 0/25/50/75/100.
* implemented mode — login charges 50%, a quiz attempt +25%, forum
  engagement +25% (one post or views of two distinct threads); without a
  login the battery stays at 0%. Statuses 0/50/75/100.

Repeated activity inside a dimension never adds charge, and the status for
week w describes that week's activity (shown at the start of week w+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .cohort import categorize
from .errors import UnachievableStatus, WeekOutOfRange
from .eventstore import EventStore, week_of
from .indicators import weekly_indicators
from .logparse import EventKind, VIDEO_KINDS


@dataclass(frozen=True)
class BatteryRuleSet:
    mode: str = "implemented"  # or "paper"

    def achievable(self) -> tuple[int, ...]:
        return (0, 25, 50, 75, 100) if self.mode == "paper" else (0, 50, 75, 100)


@dataclass
class BatteryStatus:
    user_id: str
    week: int
    percent: int
    dimensions: list[str]  # satisfied dimensions, in charge order
    tooltip: str
    symbol_id: str


# Feedback texts keyed by percent; shown as tooltip/mouseover on the symbol.
# The 25% text never appeared in deployment and is a local extension.
TOOLTIPS = {
    0: "No activity last week – we are looking forward to seeing you again this week!",
    25: "Your activity last week is 25%. Every activity counts – keep going!",
    50: "Your activity last week is 50%. Good! Increase your activities to score better!",
    75: "Your activity last week is 75%. Great! Keep it up!",
    100: "Your activity in the previous week is 100%. Congratulations. Your commitment is excellent. Keep it up!",
}


def tooltip(percent: int, rules: Optional[BatteryRuleSet] = None) -> str:
    rules = rules or BatteryRuleSet()
    if percent not in rules.achievable():
        raise UnachievableStatus(percent, rules.mode)
    return TOOLTIPS[percent]


@dataclass
class WeekDimensions:
    login: bool
    video: bool
    quiz: bool
    forum: bool


def _week_dimensions(store: EventStore, course_id: str, user_id: str, week: int) -> WeekDimensions:
    posts = 0
    threads_read: set[str] = set()
    login = video = quiz = False
    for e in store.query_events(course=course_id, user=user_id, week=week):
        if e.kind == EventKind.LOGIN:
            login = True
        elif e.kind in VIDEO_KINDS:
            video = True
        elif e.kind == EventKind.QUIZ_ATTEMPT:
            quiz = True
        elif e.kind == EventKind.FORUM_POST:
            posts += 1
        elif e.kind == EventKind.FORUM_READ:
            threads_read.add(str(e.payload.get("thread_id", "")))
    forum = posts >= 1 or len(threads_read) >= 2
    return WeekDimensions(login, video, quiz, forum)


def battery_week(
    store: EventStore, course_id: str, user_id: str, week: int,
    rules: Optional[BatteryRuleSet] = None,
) -> BatteryStatus:
    """Battery status for one course week (1..duration_weeks)."""
    cfg = store.course(course_id)
    rules = rules or BatteryRuleSet(cfg.battery_mode)
    if not 1 <= week <= cfg.duration_weeks:
        raise WeekOutOfRange(week, cfg.duration_weeks)
    dims = _week_dimensions(store, course_id, user_id, week)
    satisfied: list[str] = []
    if rules.mode == "paper":
        for name in ("login", "video", "quiz", "forum"):
            if getattr(dims, name):
                satisfied.append(name)
        percent = 25 * len(satisfied)
    else:
        percent = 0
        if dims.login:
            satisfied.append("login")
            percent = 50
            if dims.quiz:
                satisfied.append("quiz")
                percent += 25
            if dims.forum:
                satisfied.append("forum")
                percent += 25
    return BatteryStatus(
        user_id, week, percent, satisfied, tooltip(percent, rules), f"battery-{percent}"
    )


def current_week(store: EventStore, course_id: str, now) -> int:
    """Last completed course week at `now` (statuses describe finished weeks)."""
    cfg = store.course(course_id)
    w = week_of(cfg, now)
    return max(1, min(cfg.duration_weeks, w - 1))


def battery_report(
    store: EventStore, course_id: str, week: int,
    rules: Optional[BatteryRuleSet] = None,
) -> dict[int, int]:
    """Status distribution {percent -> count} over the course's active students."""
    summary = categorize(store, course_id)
    dist: dict[int, int] = {}
    for user in sorted(summary.active_users):
        status = battery_week(store, course_id, user, week, rules)
        dist[status.percent] = dist.get(status.percent, 0) + 1
    return dist


@dataclass
class ActivityRatioTrend:
    course_id: str
    registrants: int
    active: int
    overall_ratio: Optional[float]  # percent, None for an empty course
    per_week: dict[int, float]  # week -> percent of registrants active that week


def activity_ratio_trend(store: EventStore, course_id: str) -> ActivityRatioTrend:
    """Active/registrant ratio, whole course and per week."""
    cfg = store.course(course_id)
    summary = categorize(store, course_id)
    registrants = summary.registrants
    overall = None if registrants == 0 else 100.0 * summary.active / registrants
    per_week: dict[int, float] = {}
    if registrants:
        from .cohort import _ACTIVE_KINDS  # shared qualifying-kind table

        qualifying = _ACTIVE_KINDS[cfg.active_definition]
        weekly_active: dict[int, set[str]] = {}
        for e in store.query_events(course=course_id):
            if e.kind in qualifying and e.user_id in summary.registrant_users:
                weekly_active.setdefault(week_of(cfg, e.at), set()).add(e.user_id)
        for w in range(1, cfg.duration_weeks + 1):
            per_week[w] = 100.0 * len(weekly_active.get(w, set())) / registrants
    return ActivityRatioTrend(course_id, registrants, summary.active, overall, per_week)
