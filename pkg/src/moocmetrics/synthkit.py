"""Seeded synthetic cohorts, weekly activity series and raw log text.

Generators reproduce the empirical shapes the analytics are tested against:
archetype cohorts drawn from published cluster means/SDs, weekly series with
a planted knee, and raw `%\\`/`%|` log text that round-trips through the
parser with exact bookkeeping. Counts come from a truncated normal (at 0)
rounded to integers; oracles share that model. Everything is deterministic
per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidSpec
from .eventstore import CourseConfig
from .indicators import EngagementVector

ENGAGEMENT_KEYS = ("reading_freq", "writing_freq", "videos_watched", "quiz_attempts")


@dataclass
class ArchetypeSpec:
    name: str
    proportion: float
    means: dict[str, float]  # engagement variables, optionally logins/downloads
    sds: dict[str, float]
    certification_probability: float = 0.0
    weekly_decay: Optional[list[float]] = None  # relative week weights


# Published cluster parameters (means ± SD, sizes, certification ratios) for
# the two subpopulations of the ten-week university MOOC.
UNDERGRAD_SPECS = [
    ArchetypeSpec("Dropout", 95 / 459,
                  {"reading_freq": 6.25, "writing_freq": 0.01, "videos_watched": 2.44, "quiz_attempts": 2.76},
                  {"reading_freq": 6.38, "writing_freq": 0.10, "videos_watched": 3.42, "quiz_attempts": 3.86},
                  certification_probability=0.1053),
    ArchetypeSpec("PerfectStudents", 154 / 459,
                  {"reading_freq": 42.23, "writing_freq": 0.03, "videos_watched": 20.76, "quiz_attempts": 20.56},
                  {"reading_freq": 23.23, "writing_freq": 0.19, "videos_watched": 6.01, "quiz_attempts": 3.84},
                  certification_probability=0.9610),
    ArchetypeSpec("GamingTheSystem", 206 / 459,
                  {"reading_freq": 23.99, "writing_freq": 0.00, "videos_watched": 5.77, "quiz_attempts": 19.64},
                  {"reading_freq": 11.19, "writing_freq": 0.07, "videos_watched": 4.01, "quiz_attempts": 3.84},
                  certification_probability=0.9436),
    ArchetypeSpec("Social", 4 / 459,
                  {"reading_freq": 62.00, "writing_freq": 4.00, "videos_watched": 3.25, "quiz_attempts": 8.50},
                  {"reading_freq": 53.68, "writing_freq": 1.41, "videos_watched": 4.72, "quiz_attempts": 9.61},
                  certification_probability=0.50),
]

EXTERNAL_SPECS = [
    ArchetypeSpec("Dropout", 329 / 379,
                  {"reading_freq": 6.03, "writing_freq": 0.23, "videos_watched": 1.24, "quiz_attempts": 0.68},
                  {"reading_freq": 10.97, "writing_freq": 0.98, "videos_watched": 2.52, "quiz_attempts": 2.09},
                  certification_probability=0.01),
    ArchetypeSpec("PerfectStudents", 8 / 379,
                  {"reading_freq": 198.63, "writing_freq": 16.13, "videos_watched": 24.75, "quiz_attempts": 21.50},
                  {"reading_freq": 63.05, "writing_freq": 9.42, "videos_watched": 6.34, "quiz_attempts": 3.82},
                  certification_probability=1.0),
    ArchetypeSpec("GamingTheSystem", 42 / 379,
                  {"reading_freq": 51.76, "writing_freq": 0.71, "videos_watched": 18.10, "quiz_attempts": 19.33},
                  {"reading_freq": 43.22, "writing_freq": 1.88, "videos_watched": 8.36, "quiz_attempts": 6.06},
                  certification_probability=0.7619),
]


@dataclass
class SynthStudent:
    user_id: str
    role: str  # hidden label, for oracle scoring only
    certified: bool
    counts: dict[str, int]
    weekly_decay: Optional[list[float]] = None

    def vector(self) -> EngagementVector:
        return EngagementVector(
            self.user_id,
            self.counts.get("reading_freq", 0),
            self.counts.get("writing_freq", 0),
            self.counts.get("videos_watched", 0),
            self.counts.get("quiz_attempts", 0),
        )


@dataclass
class SynthCohort:
    students: list[SynthStudent]
    seed: int

    def vectors(self) -> list[EngagementVector]:
        return [s.vector() for s in self.students]

    def roles(self) -> dict[str, str]:
        return {s.user_id: s.role for s in self.students}

    def certified_users(self) -> set[str]:
        return {s.user_id for s in self.students if s.certified}


def _allocate(n: int, proportions: Sequence[float]) -> list[int]:
    """Largest-remainder proportional allocation summing exactly to n."""
    raw = [n * p for p in proportions]
    sizes = [int(x) for x in raw]
    remainders = sorted(range(len(raw)), key=lambda i: raw[i] - sizes[i], reverse=True)
    for i in remainders[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def synth_cohort(specs: Sequence[ArchetypeSpec], n: int, seed: int = 0) -> SynthCohort:
    """Draw a cohort of n students from archetype specs (hidden role labels)."""
    if n < 1:
        raise InvalidSpec("n must be >= 1")
    total = sum(s.proportion for s in specs)
    if not specs or abs(total - 1.0) > 1e-6:
        raise InvalidSpec(f"proportions must sum to 1, got {total}")
    for spec in specs:
        if any(sd < 0 for sd in spec.sds.values()):
            raise InvalidSpec(f"negative SD in {spec.name}")
    rng = np.random.default_rng(seed)
    sizes = _allocate(n, [s.proportion for s in specs])
    students: list[SynthStudent] = []
    uid = 0
    for spec, size in zip(specs, sizes):
        keys = sorted(set(spec.means) | set(spec.sds))
        for _ in range(size):
            counts = {}
            for key in keys:
                value = rng.normal(spec.means.get(key, 0.0), spec.sds.get(key, 0.0))
                counts[key] = max(0, round(value))
            certified = bool(rng.random() < spec.certification_probability)
            students.append(SynthStudent(
                f"u{uid:05d}", spec.name, certified, counts, spec.weekly_decay
            ))
            uid += 1
    return SynthCohort(students, seed)


@dataclass
class SeriesShape:
    start_level: int = 1000
    knee_week: int = 4
    post_knee_decline: float = 0.05


def synth_weekly_series(shape: SeriesShape, weeks: int, seed: int = 0) -> list[int]:
    """Weekly counts declining steeply before the knee and gently after.

    Pre-knee week-over-week declines land in [0.30, 0.45]; from the knee on
    they never exceed `post_knee_decline` (integer arithmetic keeps the
    bound exact).
    """
    if weeks < 3:
        raise InvalidSpec("need at least 3 weeks")
    if not 1 <= shape.knee_week <= weeks:
        raise InvalidSpec(f"knee_week {shape.knee_week} outside 1..{weeks}")
    rng = np.random.default_rng(seed)
    series = [shape.start_level]
    for week in range(2, weeks + 1):
        prev = series[-1]
        if week <= shape.knee_week:
            lo = int(np.ceil(prev * 0.30))
            hi = max(lo, int(prev * 0.45))
            drop = int(rng.integers(lo, hi + 1))
        else:
            hi = int(prev * shape.post_knee_decline)
            drop = int(rng.integers(0, hi + 1)) if hi > 0 else 0
        series.append(max(1, prev - drop))
    return series


# ----------------------------------------------------------------------
# raw log emission

_WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
           "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")

# The three observed timestamp renderings: named zone, entity-encoded zone
# name, bare offset.
_TS_VARIANTS = ((60, "CET"), (60, "Mittleurop&#228;ische Zeit"), (0, None))


def render_log_timestamp(at_utc: datetime, variant: int) -> str:
    offset_min, name = _TS_VARIANTS[variant % len(_TS_VARIANTS)]
    local = at_utc + timedelta(minutes=offset_min)
    sign = "+" if offset_min >= 0 else "-"
    hhmm = f"{abs(offset_min) // 60:02d}{abs(offset_min) % 60:02d}"
    text = (
        f"{_WEEKDAYS[local.weekday()]} {_MONTHS[local.month - 1]} {local.day:02d} "
        f"{local.year} {local.hour:02d}:{local.minute:02d}:{local.second:02d} "
        f"GMT{sign}{hhmm}"
    )
    if name:
        text += f" ({name})"
    return text


BASE_URL = "https://mooc.example"


@dataclass
class LogBundle:
    text: str
    truth: dict  # {"users": {uid: {indicator: count}}, "totals": {indicator: count}}


def synth_logs(cohort: SynthCohort, course: CourseConfig, seed: int = 0) -> LogBundle:
    """Raw log text whose parsed indicators equal the cohort's planted counts.

    Per student: `videos_watched` play events on distinct videos,
    `reading_freq` thread reads (threads cycle so two reads already span two
    threads), `writing_freq` posts, quiz attempts capped at the course's
    attempt limit per quiz, plus optional logins/downloads; certified
    students claim the certificate at the end. Timestamps cycle the three
    observed renderings and stay inside course weeks.
    """
    rng = np.random.default_rng(seed)
    start = datetime(course.start.year, course.start.month, course.start.day,
                     tzinfo=timezone.utc)
    course_span = 7 * course.duration_weeks
    base = f"{BASE_URL}/course/{course.course_id}"
    lines: list[str] = []
    truth_users: dict[str, dict[str, int]] = {}
    totals = {"logins": 0, "forum_reads": 0, "forum_posts": 0,
              "video_events": 0, "quiz_attempts": 0, "downloads": 0}
    variant = 0

    for student in cohort.students:
        seq = 0
        if student.weekly_decay and len(student.weekly_decay) == course.duration_weeks:
            weights = np.array(student.weekly_decay, dtype=float)
        else:
            weights = np.ones(course.duration_weeks)
        weights = weights / weights.sum()

        def emit(url: str) -> None:
            nonlocal seq, variant
            week = int(rng.choice(course.duration_weeks, p=weights)) + 1
            # (seq*997) mod 604000 is injective for per-user sequence numbers
            # below 604000, so no two of a student's events can share an
            # instant (the dedup key would otherwise swallow repeats)
            at = (start + timedelta(days=7 * (week - 1))
                  + timedelta(seconds=(seq * 997) % 604000))
            lines.append(f"{render_log_timestamp(at, variant)}%\\{student.user_id}%\\{url}")
            variant += 1
            seq += 1

        counts = student.counts
        for i in range(counts.get("logins", 0)):
            emit(f"{base}/login?n={i}")
        for i in range(counts.get("reading_freq", 0)):
            emit(f"{base}/forum/thread/t{i % 10 + 1}/read")
        for i in range(counts.get("writing_freq", 0)):
            emit(f"{base}/forum/thread/t{i % 10 + 1}/post")
        for i in range(counts.get("videos_watched", 0)):
            emit(f"{base}/video/v{i + 1}?action=play&pos=0")
        for i in range(counts.get("quiz_attempts", 0)):
            quiz = i // course.max_quiz_attempts + 1
            attempt = i % course.max_quiz_attempts + 1
            score = int(rng.integers(30, 101))
            emit(f"{base}/quiz/q{quiz}/attempt/{attempt}?score={score}")
        for i in range(counts.get("downloads", 0)):
            emit(f"{base}/file/f{i % 5 + 1}/download")
        if student.certified:
            emit(f"{base}/certificate")

        user_truth = {
            "logins": counts.get("logins", 0),
            "forum_reads": counts.get("reading_freq", 0),
            "forum_posts": counts.get("writing_freq", 0),
            "video_events": counts.get("videos_watched", 0),
            "quiz_attempts": counts.get("quiz_attempts", 0),
            "downloads": counts.get("downloads", 0),
        }
        truth_users[student.user_id] = user_truth
        for key, value in user_truth.items():
            totals[key] += value

    return LogBundle("%|".join(lines), {"users": truth_users, "totals": totals})
