"""Student categorization, dropout rates, dropout-point detection and
weekly success-rate scoring.

Categories nest as sets, not just counts: certified ⊆ completers ⊆ active ⊆
registrants. "Active" has two deployed definitions (selected per course):
watched a video / posted / attempted a quiz, or posted / read / attempted.
Completion means passing every quiz of the course under its pass rule, and
certification additionally requires the terminal certificate event.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import EmptyGroup, InvalidWeights, SeriesTooShort
from .eventstore import EventStore, week_of
from .indicators import (
    INDICATOR_NAMES,
    WeeklyIndicators,
    certificate_holders,
    quiz_summary,
    weekly_indicators,
)
from .logparse import EventKind, VIDEO_KINDS


@dataclass
class CohortSummary:
    course_id: str
    registrant_users: set[str]
    active_users: set[str]
    completer_users: set[str]
    certified_users: set[str]

    @property
    def registrants(self) -> int:
        return len(self.registrant_users)

    @property
    def active(self) -> int:
        return len(self.active_users)

    @property
    def completers(self) -> int:
        return len(self.completer_users)

    @property
    def certified(self) -> int:
        return len(self.certified_users)

    def ratios(self) -> dict[str, Optional[float]]:
        """Percentages of registrants; None when the course is empty."""
        if self.registrants == 0:
            return {"active_pct": None, "completer_pct": None, "certified_pct": None}
        return {
            "active_pct": 100.0 * self.active / self.registrants,
            "completer_pct": 100.0 * self.completers / self.registrants,
            "certified_pct": 100.0 * self.certified / self.registrants,
        }

    @classmethod
    def from_counts(cls, course_id: str, registrants: int, active: int,
                    completers: int, certified: int) -> "CohortSummary":
        """Summary from bare counts (synthetic member ids), for rate math
        on published figures."""
        users = [f"u{i:05d}" for i in range(registrants)]
        return cls(
            course_id,
            set(users),
            set(users[:active]),
            set(users[:completers]),
            set(users[:certified]),
        )


_ACTIVE_KINDS = {
    "video_post_quiz": VIDEO_KINDS + (EventKind.FORUM_POST, EventKind.QUIZ_ATTEMPT),
    "post_read_quiz": (EventKind.FORUM_POST, EventKind.FORUM_READ, EventKind.QUIZ_ATTEMPT),
}


def categorize(store: EventStore, course_id: str,
               active_definition: Optional[str] = None) -> CohortSummary:
    """Count the four nested categories for a course.

    `active_definition` overrides the course config's choice.
    """
    cfg = store.course(course_id)
    definition = active_definition or cfg.active_definition
    if definition not in _ACTIVE_KINDS:
        raise ValueError(f"unknown active definition: {definition!r}")
    qualifying = _ACTIVE_KINDS[definition]

    registrants = set(store.registrants(course_id))
    active: set[str] = set()
    quiz_ids: set[str] = set()
    attempted: dict[str, set[str]] = {}
    for e in store.query_events(course=course_id):
        if e.user_id not in registrants:
            continue
        if e.kind in qualifying:
            active.add(e.user_id)
        if e.kind == EventKind.QUIZ_ATTEMPT:
            quiz_ids.add(str(e.payload.get("quiz_id", "")))
            attempted.setdefault(e.user_id, set()).add(str(e.payload.get("quiz_id", "")))

    completers: set[str] = set()
    for user, quizzes in attempted.items():
        if quizzes != quiz_ids:
            continue
        summaries = quiz_summary(store, course_id, user)
        if summaries and all(s.passed for s in summaries):
            completers.add(user)
    completers &= active

    certified = completers & certificate_holders(store, course_id)
    return CohortSummary(course_id, registrants, active, completers, certified)


RATE_DEFINITIONS = (
    ("certified_to_registrants", "certified", "registrants"),
    ("certified_to_active", "certified", "active"),
    ("completers_to_registrants", "completers", "registrants"),
    ("completers_to_active", "completers", "active"),
    ("active_to_registrants", "active", "registrants"),
)


def dropout_rates(summary: CohortSummary) -> dict[str, Optional[float]]:
    """The five dropout-rate definitions, each 100·(1 − numerator/denominator).

    A zero denominator makes that definition undefined (None), never fatal.
    """
    out: dict[str, Optional[float]] = {}
    for name, num_attr, den_attr in RATE_DEFINITIONS:
        num = getattr(summary, num_attr)
        den = getattr(summary, den_attr)
        out[name] = None if den == 0 else 100.0 * (1.0 - num / den)
    return out


@dataclass
class DropoutPointConfig:
    epsilon: float = 0.15
    allowed_exceedances: int = 0
    indicator: str = "quiz_attempts"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")
        if self.allowed_exceedances < 0:
            raise ValueError("allowed_exceedances must be >= 0")


@dataclass
class DropoutPoint:
    stabilized: bool
    week_boundary: Optional[tuple[int, int]]  # (w, w+1), 1-indexed weeks
    declines: list[float]


def dropout_point(series: Sequence[float], cfg: Optional[DropoutPointConfig] = None) -> DropoutPoint:
    """Find the week after which the relative activity decline stays small.

    `series` holds weekly counts for weeks 1..n. The relative decline at
    week j is d_j = max(0, (a_j − a_{j+1})/a_j); the detector returns the
    smallest w such that d_j ≤ ε for all j ≥ w, tolerating up to
    `allowed_exceedances` violations. No such week ⇒ stabilized is False.
    """
    cfg = cfg or DropoutPointConfig()
    if len(series) < 3:
        raise SeriesTooShort(f"need >= 3 weeks, got {len(series)}")
    declines = []
    for j in range(len(series) - 1):
        a, b = series[j], series[j + 1]
        declines.append(max(0.0, (a - b) / a) if a > 0 else 0.0)
    for w in range(1, len(series)):
        violations = sum(1 for d in declines[w - 1:] if d > cfg.epsilon)
        if violations <= cfg.allowed_exceedances:
            return DropoutPoint(True, (w, w + 1), declines)
    return DropoutPoint(False, None, declines)


def weekly_course_series(store: EventStore, course_id: str,
                         indicator: str = "quiz_attempts") -> list[int]:
    """Course-wide weekly totals of one indicator for weeks 1..duration."""
    cfg = store.course(course_id)
    if indicator not in INDICATOR_NAMES:
        raise ValueError(f"unknown indicator: {indicator!r}")
    counts = [0] * cfg.duration_weeks
    kinds = {k for k, name in _INDICATOR_KINDS.items() if name == indicator}
    for e in store.query_events(course=course_id):
        if e.kind not in kinds:
            continue
        w = week_of(cfg, e.at)
        if 1 <= w <= cfg.duration_weeks:
            counts[w - 1] += 1
    return counts


_INDICATOR_KINDS = {
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
class SuccessRateWeights:
    w1: float = 0.4  # forum readings
    w2: float = 0.3  # quiz attempts
    w3: float = 0.2  # login frequency
    w4: float = 0.1  # forum writings

    def validate(self) -> None:
        if not (self.w1 > self.w2 > self.w3 > self.w4 >= 0):
            raise InvalidWeights(
                f"weights must satisfy w1 > w2 > w3 > w4 >= 0, got "
                f"({self.w1}, {self.w2}, {self.w3}, {self.w4})"
            )


def success_rate(week: WeeklyIndicators, weights: Optional[SuccessRateWeights] = None) -> float:
    """Weekly weighted activity sum; higher means lower estimated risk.

    Only the weight ordering is fixed by the gap analysis (readings carry the
    most weight, then quiz attempts, logins, writings); the default values
    are one admissible choice and the score is ordinal.
    """
    weights = weights or SuccessRateWeights()
    weights.validate()
    return (weights.w1 * week.forum_reads
            + weights.w2 * week.quiz_attempts
            + weights.w3 * week.logins
            + weights.w4 * week.forum_posts)


@dataclass
class GroupComparison:
    course_id: str
    window: tuple[int, int]  # inclusive week range
    certified_size: int
    dropped_size: int
    means: dict  # indicator -> {"certified": float, "dropped": float, "gap": float}

    def largest_gap(self) -> str:
        return max(self.means, key=lambda name: self.means[name]["gap"])


def compare_groups(
    store: EventStore, course_id: str,
    week_window: Optional[tuple[int, int]] = None,
) -> GroupComparison:
    """Average weekly activity per indicator for certified vs dropped students.

    The gap column (certified − dropped) is what justifies the success-rate
    weight ordering. `week_window` restricts to an inclusive week range;
    default is the whole course.
    """
    cfg = store.course(course_id)
    window = week_window or (1, cfg.duration_weeks)
    lo, hi = window
    if not (1 <= lo <= hi <= cfg.duration_weeks):
        raise ValueError(f"window {window} outside 1..{cfg.duration_weeks}")
    summary = categorize(store, course_id)
    certified = summary.certified_users
    dropped = summary.registrant_users - certified
    if not certified:
        raise EmptyGroup("certified")
    if not dropped:
        raise EmptyGroup("dropped")

    sums = {name: {"certified": 0.0, "dropped": 0.0} for name in INDICATOR_NAMES}
    for group_name, users in (("certified", certified), ("dropped", dropped)):
        for user in users:
            for row in weekly_indicators(store, course_id, user):
                if lo <= row.week <= hi:
                    for name in INDICATOR_NAMES:
                        sums[name][group_name] += getattr(row, name)
    n_weeks = hi - lo + 1
    means = {}
    for name in INDICATOR_NAMES:
        cert_mean = sums[name]["certified"] / (len(certified) * n_weeks)
        drop_mean = sums[name]["dropped"] / (len(dropped) * n_weeks)
        means[name] = {
            "certified": cert_mean,
            "dropped": drop_mean,
            "gap": cert_mean - drop_mean,
        }
    return GroupComparison(course_id, window, len(certified), len(dropped), means)
