from __future__ import annotations

from datetime import date, datetime, timedelta, timezone

import pytest

from moocmetrics.eventstore import CourseConfig, EventStore, StudentRecord
from moocmetrics.logparse import Event, EventKind


def make_course(course_id="gol", start=date(2014, 10, 20), weeks=8,
                threshold=50.0, **kw) -> CourseConfig:
    return CourseConfig(
        course_id=course_id,
        title=kw.pop("title", course_id.upper()),
        start=start,
        duration_weeks=weeks,
        pass_threshold_pct=threshold,
        **kw,
    )


class Planter:
    """Test helper that plants events at deterministic week-relative times."""

    def __init__(self, store: EventStore, cfg: CourseConfig):
        self.store = store
        self.cfg = cfg
        self.seq = 0
        self.pending: list[Event] = []
        self.pending_students: list[StudentRecord] = []
        store.register_course(cfg)
        self.start = datetime(cfg.start.year, cfg.start.month, cfg.start.day,
                              tzinfo=timezone.utc)

    def student(self, user_id: str, **attributes) -> None:
        self.pending_students.append(
            StudentRecord(user_id, {self.cfg.course_id}, dict(attributes)))

    def at(self, week: int, seconds: int = 0) -> datetime:
        if week == 0:
            return self.start - timedelta(days=3) + timedelta(seconds=seconds)
        return self.start + timedelta(days=7 * (week - 1), seconds=seconds)

    def event(self, user: str, kind: EventKind, week: int = 1, **payload) -> Event:
        e = Event(self.cfg.course_id, user, kind, self.at(week, self.seq), payload)
        self.seq += 1
        self.pending.append(e)
        return e

    def login(self, user, week=1):
        return self.event(user, EventKind.LOGIN, week)

    def read(self, user, thread="t1", week=1):
        return self.event(user, EventKind.FORUM_READ, week, thread_id=thread)

    def post(self, user, thread="t1", week=1):
        return self.event(user, EventKind.FORUM_POST, week, thread_id=thread)

    def play(self, user, video="v1", pos=0, week=1):
        return self.event(user, EventKind.VIDEO_PLAY, week,
                          video_id=video, position_seconds=pos)

    def pause(self, user, video="v1", pos=0, week=1):
        return self.event(user, EventKind.VIDEO_PAUSE, week,
                          video_id=video, position_seconds=pos)

    def quiz(self, user, quiz="q1", attempt=1, score=80.0, week=1, **extra):
        return self.event(user, EventKind.QUIZ_ATTEMPT, week, quiz_id=quiz,
                          attempt_no=attempt, score_pct=score, **extra)

    def download(self, user, file_id="f1", week=1):
        return self.event(user, EventKind.FILE_DOWNLOAD, week, file_id=file_id)

    def certificate(self, user, week=None):
        week = self.cfg.duration_weeks if week is None else week
        return self.event(user, EventKind.CERTIFICATE, week)

    def flush(self) -> dict:
        if self.pending_students:
            self.store.register_students(self.pending_students)
            self.pending_students = []
        result = self.store.append_events(self.pending)
        self.pending = []
        return result


@pytest.fixture
def store(tmp_path) -> EventStore:
    return EventStore(tmp_path / "store")


@pytest.fixture
def planter(store) -> Planter:
    return Planter(store, make_course())


def plant_passing_student(p: Planter, user: str, quizzes=("q1",), score=90.0,
                          certificate=True, week=1) -> None:
    """Register a student who passes every listed quiz (and maybe certifies)."""
    p.student(user)
    for quiz in quizzes:
        p.quiz(user, quiz=quiz, score=score, week=week)
    if certificate:
        p.certificate(user)


def plant_cohort_course(store: EventStore, course_id: str, registrants: int,
                        active: int, completers: int, certified: int,
                        weeks: int = 8, threshold: float = 50.0) -> Planter:
    """Plant a course with exactly the four nested category counts.

    Completers pass the single course quiz; the remaining actives only watch
    a video (never attempt), so they can't accidentally complete.
    """
    assert certified <= completers <= active <= registrants
    p = Planter(store, make_course(course_id=course_id, weeks=weeks,
                                   threshold=threshold))
    users = [f"{course_id}-u{i:05d}" for i in range(registrants)]
    for u in users:
        p.student(u)
    for i in range(completers):
        p.quiz(users[i], quiz="q1", score=threshold + 10, week=1 + i % weeks)
    for i in range(completers, active):
        p.play(users[i], video="v1", pos=0, week=1 + i % weeks)
    for i in range(certified):
        p.certificate(users[i])
    p.flush()
    return p
