"""Per-student and per-course engagement indicators.

Everything here is a pure function over an EventStore snapshot: weekly
activity counts, whole-course engagement vectors, activity profiles, quiz
best-of summaries, video retention, reaction-delay statistics, hourly
rhythm, and the product-moment correlation helper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    AttemptLimitExceeded,
    DegenerateInput,
    NoObservations,
    UnknownUser,
    UnknownVideo,
)
from .eventstore import CourseConfig, EventStore, week_of
from .logparse import Event, EventKind, VIDEO_KINDS


@dataclass
class WeeklyIndicators:
    user_id: str
    week: int
    logins: int = 0
    forum_reads: int = 0
    forum_posts: int = 0
    video_events: int = 0
    quiz_attempts: int = 0
    downloads: int = 0

    def total(self) -> int:
        return (self.logins + self.forum_reads + self.forum_posts
                + self.video_events + self.quiz_attempts + self.downloads)


INDICATOR_NAMES = ("logins", "forum_reads", "forum_posts", "video_events",
                   "quiz_attempts", "downloads")

_KIND_TO_INDICATOR = {
    EventKind.LOGIN: "logins",
    EventKind.FORUM_READ: "forum_reads",
    EventKind.FORUM_POST: "forum_posts",
    EventKind.VIDEO_PLAY: "video_events",
    EventKind.VIDEO_PAUSE: "video_events",
    EventKind.VIDEO_COMPLETE: "video_events",
    EventKind.QUIZ_ATTEMPT: "quiz_attempts",
    EventKind.FILE_DOWNLOAD: "downloads",
}


@dataclass
class EngagementVector:
    user_id: str
    reading_freq: int
    writing_freq: int
    videos_watched: int
    quiz_attempts: int

    def as_list(self) -> list[float]:
        return [float(self.reading_freq), float(self.writing_freq),
                float(self.videos_watched), float(self.quiz_attempts)]


ENGAGEMENT_VARIABLES = ("reading_freq", "writing_freq", "videos_watched", "quiz_attempts")


@dataclass
class QuizSummary:
    user_id: str
    quiz_id: str
    attempts: list[float]
    recorded: float
    passed: bool


@dataclass
class RetentionCurve:
    video_id: str
    granularity: str  # "second" | "percent"
    positions: list[int]
    watchers_at: list[int]
    views_at: list[int]
    drop_ratio_at: list[float]


@dataclass
class DelayStats:
    n: int
    median: float
    q1: float
    q3: float
    outliers: list[float]
    excluded_over_cap: int


def _require_user(store: EventStore, course_id: str, user_id: str) -> None:
    rec = store.students.get(user_id)
    if rec is None or course_id not in rec.course_ids:
        raise UnknownUser(user_id)


def certificate_holders(store: EventStore, course_id: str) -> set[str]:
    """Users with a terminal certificate event in the course."""
    return {e.user_id for e in store.query_events(course=course_id, kind=EventKind.CERTIFICATE)}


def weekly_indicators(store: EventStore, course_id: str, user_id: str) -> list[WeeklyIndicators]:
    """One row per week 0..duration+1; inactive weeks are present with zeros."""
    cfg = store.course(course_id)
    _require_user(store, course_id, user_id)
    rows = {w: WeeklyIndicators(user_id, w) for w in range(cfg.duration_weeks + 2)}
    for e in store.query_events(course=course_id, user=user_id):
        name = _KIND_TO_INDICATOR.get(e.kind)
        if name is None:
            continue
        row = rows[week_of(cfg, e.at)]
        setattr(row, name, getattr(row, name) + 1)
    return [rows[w] for w in range(cfg.duration_weeks + 2)]


def engagement_vector(
    store: EventStore, course_id: str, user_id: str, video_counting: str = "distinct"
) -> EngagementVector:
    """Whole-course totals for the four clustering variables.

    `video_counting`: "distinct" counts videos with at least one interaction
    (the default, matching the observed magnitudes of a ~21-video course);
    "events" counts raw video events instead.
    """
    store.course(course_id)
    _require_user(store, course_id, user_id)
    reads = writes = quizzes = raw_video = 0
    videos: set[str] = set()
    for e in store.query_events(course=course_id, user=user_id):
        if e.kind == EventKind.FORUM_READ:
            reads += 1
        elif e.kind == EventKind.FORUM_POST:
            writes += 1
        elif e.kind == EventKind.QUIZ_ATTEMPT:
            quizzes += 1
        elif e.kind in VIDEO_KINDS:
            raw_video += 1
            videos.add(str(e.payload.get("video_id", "")))
    watched = len(videos) if video_counting == "distinct" else raw_video
    return EngagementVector(user_id, reads, writes, watched, quizzes)


PROFILE_ACTIVITIES = ("forum_posts", "forum_reads", "quiz_trials", "video_clicks")

_PROFILE_KIND = {
    EventKind.FORUM_POST: "forum_posts",
    EventKind.FORUM_READ: "forum_reads",
    EventKind.QUIZ_ATTEMPT: "quiz_trials",
    EventKind.VIDEO_PLAY: "video_clicks",
    EventKind.VIDEO_PAUSE: "video_clicks",
    EventKind.VIDEO_COMPLETE: "video_clicks",
}


@dataclass
class ActivityProfile:
    course_id: str
    activities: tuple[str, ...]
    weeks: list[int]
    users: list[str]
    counts: dict  # (activity, week, user) -> count, zero cells omitted
    user_class: dict  # user -> class attribute ("pupil", "public", ...)
    certified: set

    def count(self, activity: str, week: int, user: str) -> int:
        return self.counts.get((activity, week, user), 0)

    def class_size(self, student_class: str) -> int:
        return sum(1 for u in self.users if self.user_class.get(u) == student_class)

    def certified_in_class(self, student_class: str) -> int:
        return sum(1 for u in self.certified if self.user_class.get(u) == student_class)

    def activity_total(self, activity: str, student_class: Optional[str] = None) -> int:
        total = 0
        for (act, _w, user), n in self.counts.items():
            if act != activity:
                continue
            if student_class is not None and self.user_class.get(user) != student_class:
                continue
            total += n
        return total

    def mean_per_student(self, activity: str, student_class: str) -> float:
        size = self.class_size(student_class)
        if size == 0:
            raise DegenerateInput(f"no students of class {student_class!r}")
        return self.activity_total(activity, student_class) / size


def activity_profile(
    store: EventStore, course_id: str, certified: Optional[set[str]] = None
) -> ActivityProfile:
    """Dense activity-by-week-by-student profile with class/status annotations.

    `certified` defaults to the course's certificate holders; the cohort
    module can pass its stricter nested set instead.
    """
    cfg = store.course(course_id)
    users = store.registrants(course_id)
    counts: dict[tuple, int] = {}
    for e in store.query_events(course=course_id):
        activity = _PROFILE_KIND.get(e.kind)
        if activity is None:
            continue
        key = (activity, week_of(cfg, e.at), e.user_id)
        counts[key] = counts.get(key, 0) + 1
    if certified is None:
        certified = certificate_holders(store, course_id)
    user_class = {u: store.students[u].attributes.get("class", "public") for u in users}
    return ActivityProfile(
        course_id=course_id,
        activities=PROFILE_ACTIVITIES,
        weeks=list(range(cfg.duration_weeks + 2)),
        users=users,
        counts=counts,
        user_class=user_class,
        certified=set(certified) & set(users),
    )


def quiz_summary(store: EventStore, course_id: str, user_id: str) -> list[QuizSummary]:
    """Best-of summaries per quiz, pass/fail per the course's pass rule."""
    cfg = store.course(course_id)
    _require_user(store, course_id, user_id)
    attempts: dict[str, list[float]] = {}
    for e in store.query_events(course=course_id, user=user_id, kind=EventKind.QUIZ_ATTEMPT):
        attempts.setdefault(str(e.payload.get("quiz_id", "")), []).append(
            float(e.payload.get("score_pct", 0.0))
        )
    out = []
    for quiz_id in sorted(attempts):
        scores = attempts[quiz_id]
        if len(scores) > cfg.max_quiz_attempts:
            raise AttemptLimitExceeded(quiz_id, len(scores), cfg.max_quiz_attempts)
        recorded = max(scores)
        if cfg.pass_rule == "strict":
            passed = all(s >= cfg.pass_threshold_pct for s in scores)
        else:
            passed = recorded >= cfg.pass_threshold_pct
        out.append(QuizSummary(user_id, quiz_id, scores, recorded, passed))
    return out


def video_retention(
    store: EventStore, course_id: str, video_id: str, granularity: str = "second"
) -> RetentionCurve:
    """Retention from play/pause point events via the furthest-position rule.

    A viewer is counted as watching every position up to the furthest one
    they reached and as departing exactly there, so `watchers_at` is
    non-increasing and the drop ratios sum to 1. Every play event opens one
    pass from its position to the viewer's furthest, which makes replayed
    segments show views_at > watchers_at. Percent granularity scales the
    furthest observed position in the whole video to 100%.
    """
    store.course(course_id)
    furthest: dict[str, int] = {}
    plays: dict[str, list[int]] = {}
    for e in store.query_events(course=course_id):
        if e.kind not in VIDEO_KINDS or str(e.payload.get("video_id", "")) != video_id:
            continue
        pos = int(e.payload.get("position_seconds", 0))
        furthest[e.user_id] = max(furthest.get(e.user_id, 0), pos)
        if e.kind == EventKind.VIDEO_PLAY:
            plays.setdefault(e.user_id, []).append(pos)
    if not furthest:
        raise UnknownVideo(video_id)

    span = max(furthest.values())
    if granularity == "percent":
        def scale(p: int) -> int:
            return round(p * 100 / span) if span else 0
        positions = list(range(0, 101))
    elif granularity == "second":
        def scale(p: int) -> int:
            return p
        positions = list(range(0, span + 1))
    else:
        raise ValueError(f"unsupported granularity: {granularity!r}")

    furthest_scaled = {u: scale(p) for u, p in furthest.items()}
    total = len(furthest_scaled)
    watchers_at, views_at, drop_ratio_at = [], [], []
    for p in positions:
        watchers = sum(1 for f in furthest_scaled.values() if f >= p)
        views = 0
        for u, f in furthest_scaled.items():
            if f < p:
                continue
            user_plays = [scale(q) for q in plays.get(u, [])] or [0]
            views += sum(1 for q in user_plays if q <= p)
        departures = sum(1 for f in furthest_scaled.values() if f == p)
        watchers_at.append(watchers)
        views_at.append(views)
        drop_ratio_at.append(departures / total)
    return RetentionCurve(video_id, granularity, positions, watchers_at, views_at, drop_ratio_at)


def tukey_quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    """(q1, median, q3) by Tukey hinges: medians of the lower/upper halves,
    each half including the middle element when the count is odd."""
    data = sorted(values)
    n = len(data)
    if n == 0:
        raise DegenerateInput("no values")

    def med(xs: Sequence[float]) -> float:
        m = len(xs)
        mid = m // 2
        return float(xs[mid]) if m % 2 else (xs[mid - 1] + xs[mid]) / 2.0

    half = (n + 1) // 2
    return med(data[:half]), med(data), med(data[n - half:])


def reaction_delay_stats(
    store: EventStore, course_id: str, cap: float = 60.0,
    week: Optional[int] = None,
) -> dict[str, DelayStats]:
    """Delay quartiles grouped by certification status.

    Observations are `delay_seconds` payload fields; delays above the cap are
    excluded and counted. Outliers lie beyond 1.5·IQR from the hinges.
    """
    cfg = store.course(course_id)
    certified = certificate_holders(store, course_id)
    samples: dict[str, list[float]] = {"certified": [], "non_certified": []}
    excluded = {"certified": 0, "non_certified": 0}
    for e in store.query_events(course=course_id, week=week):
        delay = e.payload.get("delay_seconds")
        if delay is None:
            continue
        group = "certified" if e.user_id in certified else "non_certified"
        if float(delay) > cap:
            excluded[group] += 1
        else:
            samples[group].append(float(delay))
    if not any(samples.values()):
        raise NoObservations("no reaction-delay observations")
    out = {}
    for group, values in samples.items():
        if not values:
            continue
        q1, median, q3 = tukey_quartiles(values)
        iqr = q3 - q1
        lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
        outliers = [v for v in values if v < lo or v > hi]
        out[group] = DelayStats(len(values), median, q1, q3, outliers, excluded[group])
    return out


def hourly_rhythm(store: EventStore, course_id: str, kind: Optional[EventKind] = None) -> list[int]:
    """Event counts per course-local hour of day (24 buckets, total conserved)."""
    cfg = store.course(course_id)
    buckets = [0] * 24
    for e in store.query_events(course=course_id, kind=kind):
        local_hour = (e.at.hour + (e.at.minute + cfg.tz_offset_minutes) // 60) % 24
        buckets[local_hour] += 1
    return buckets


@dataclass
class PearsonResult:
    r: float
    n: int
    ci95: Optional[tuple[float, float]] = None


def pearson(xs: Sequence[float], ys: Sequence[float]) -> PearsonResult:
    """Product-moment correlation with a Fisher-transform 95% CI (n >= 4)."""
    if len(xs) != len(ys):
        raise DegenerateInput("length mismatch")
    n = len(xs)
    if n < 3:
        raise DegenerateInput("need at least 3 observations")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        raise DegenerateInput("constant series")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    ci = None
    if n >= 4 and abs(r) < 1.0:
        z = math.atanh(r)
        se = 1.0 / math.sqrt(n - 3)
        ci = (math.tanh(z - 1.96 * se), math.tanh(z + 1.96 * se))
    return PearsonResult(r, n, ci)
