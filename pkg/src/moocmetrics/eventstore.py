"""Deduplicating append-only event store with course/student dimensions.

Persistence layout under one data directory::

    events.log     one canonical JSON event per line, append-only
    courses.json   registered CourseConfig records
    students.json  registered StudentRecord records

Indexes are in-memory and rebuilt on open. One writer at a time (appends are
serialized by a lock); readers work over the immutable prefix that existed
when their query started, so no read lock is needed.

The twelve table projections mirror the classic log-file layout: courses,
files, downloads, forums, forum reads, forum posts, quiz attempts, logins,
quizzes, students, video events, videos.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import StorageFailure, UnknownCourse, UnknownTableKind
from .logparse import Event, EventKind
from .tabular import Table


@dataclass
class CourseConfig:
    course_id: str
    title: str
    start: date
    duration_weeks: int
    pass_threshold_pct: float
    max_quiz_attempts: int = 5
    workload_hours_per_week: Optional[float] = None
    # per-course behavior switches (both variants appear in real deployments)
    pass_rule: str = "best_of"  # or "strict": every attempt must pass
    active_definition: str = "video_post_quiz"  # or "post_read_quiz"
    battery_mode: str = "implemented"  # or "paper"
    tz_offset_minutes: int = 0  # course-local clock offset from UTC

    def __post_init__(self):
        if self.duration_weeks < 1:
            raise ValueError("duration_weeks must be >= 1")
        if not 0 < self.pass_threshold_pct <= 100:
            raise ValueError("pass_threshold_pct must be in (0, 100]")
        if self.max_quiz_attempts < 1:
            raise ValueError("max_quiz_attempts must be >= 1")

    def to_json(self) -> dict:
        d = self.__dict__.copy()
        d["start"] = self.start.isoformat()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "CourseConfig":
        d = dict(d)
        d["start"] = date.fromisoformat(d["start"])
        return cls(**d)


@dataclass
class StudentRecord:
    user_id: str
    course_ids: set[str] = field(default_factory=set)
    attributes: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "user_id": self.user_id,
            "course_ids": sorted(self.course_ids),
            "attributes": self.attributes,
        }

    @classmethod
    def from_json(cls, d: dict) -> "StudentRecord":
        return cls(d["user_id"], set(d["course_ids"]), dict(d.get("attributes", {})))


def _at_text(at: datetime) -> str:
    return at.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_at(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def payload_digest(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(canonical.encode("utf-8")).hexdigest()


def event_key(e: Event) -> tuple:
    return (e.course_id, e.user_id, e.kind.value, _at_text(e.at), payload_digest(e.payload))


def event_line(e: Event) -> str:
    """Canonical single-line serialization (documented store format)."""
    return json.dumps(
        {
            "at": _at_text(e.at),
            "course": e.course_id,
            "kind": e.kind.value,
            "payload": e.payload,
            "user": e.user_id,
        },
        sort_keys=True,
        separators=(",", ":"),
    )


def event_from_line(line: str) -> Event:
    d = json.loads(line)
    return Event(d["course"], d["user"], EventKind(d["kind"]), _parse_at(d["at"]), d["payload"])


TABLE_KINDS = (
    "courses", "students", "logins", "forum_reads", "forum_posts", "forums",
    "quiz_attempts", "quizzes", "video_events", "videos", "downloads", "files",
)

_EVENT_TABLE_KIND = {
    "logins": EventKind.LOGIN,
    "forum_reads": EventKind.FORUM_READ,
    "forum_posts": EventKind.FORUM_POST,
    "quiz_attempts": EventKind.QUIZ_ATTEMPT,
    "downloads": EventKind.FILE_DOWNLOAD,
}


def week_of(cfg: CourseConfig, at: datetime) -> int:
    """Course week of an instant: 0 pre-course, 1..duration in course,
    duration+1 for anything after the last course day."""
    start = datetime(cfg.start.year, cfg.start.month, cfg.start.day, tzinfo=timezone.utc)
    delta = at.astimezone(timezone.utc) - start
    if delta < timedelta(0):
        return 0
    days = delta.days
    if days >= 7 * cfg.duration_weeks:
        return cfg.duration_weeks + 1
    return days // 7 + 1


class EventStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._events_path = self.data_dir / "events.log"
        self._courses_path = self.data_dir / "courses.json"
        self._students_path = self.data_dir / "students.json"
        self._write_lock = threading.Lock()
        self.courses: dict[str, CourseConfig] = {}
        self.students: dict[str, StudentRecord] = {}
        self._events: list[Event] = []
        self._keys: set[tuple] = set()
        self._by_course_user: dict[tuple[str, str], list[Event]] = {}
        self._load()

    def _load(self) -> None:
        if self._courses_path.exists():
            doc = json.loads(self._courses_path.read_text(encoding="utf-8"))
            self.courses = {c["course_id"]: CourseConfig.from_json(c) for c in doc}
        if self._students_path.exists():
            doc = json.loads(self._students_path.read_text(encoding="utf-8"))
            self.students = {s["user_id"]: StudentRecord.from_json(s) for s in doc}
        if self._events_path.exists():
            with self._events_path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    e = event_from_line(line)
                    self._index(e)

    def _index(self, e: Event) -> None:
        self._events.append(e)
        self._keys.add(event_key(e))
        self._by_course_user.setdefault((e.course_id, e.user_id), []).append(e)

    # ------------------------------------------------------------------
    # dimensions

    def register_course(self, cfg: CourseConfig) -> None:
        self.courses[cfg.course_id] = cfg
        self._dump_courses()

    def register_student(self, rec: StudentRecord) -> None:
        self.register_students([rec])

    def register_students(self, records: Iterable[StudentRecord]) -> None:
        for rec in records:
            existing = self.students.get(rec.user_id)
            if existing is not None:
                existing.course_ids |= rec.course_ids
                existing.attributes.update(rec.attributes)
            else:
                self.students[rec.user_id] = rec
        self._dump_students()

    def _dump_courses(self) -> None:
        doc = [c.to_json() for c in sorted(self.courses.values(), key=lambda c: c.course_id)]
        self._courses_path.write_text(json.dumps(doc, indent=2), encoding="utf-8")

    def _dump_students(self) -> None:
        doc = [s.to_json() for s in sorted(self.students.values(), key=lambda s: s.user_id)]
        self._students_path.write_text(json.dumps(doc, indent=2), encoding="utf-8")

    def course(self, course_id: str) -> CourseConfig:
        if course_id not in self.courses:
            raise UnknownCourse(course_id)
        return self.courses[course_id]

    def registrants(self, course_id: str) -> list[str]:
        self.course(course_id)
        return sorted(u for u, s in self.students.items() if course_id in s.course_ids)

    # ------------------------------------------------------------------
    # events

    def append_events(self, events: Sequence[Event]) -> dict:
        """Append, dropping events whose key is already present.

        The write is atomic per call: all accepted lines are buffered and
        written in a single OS write, so a crash can't leave a partial batch.
        """
        accepted: list[Event] = []
        with self._write_lock:
            batch_keys = set(self._keys)
            for e in events:
                key = event_key(e)
                if key in batch_keys:
                    continue
                batch_keys.add(key)
                accepted.append(e)
            if accepted:
                buf = "".join(event_line(e) + "\n" for e in accepted)
                try:
                    with self._events_path.open("a", encoding="utf-8") as fh:
                        fh.write(buf)
                        fh.flush()
                except OSError as exc:
                    raise StorageFailure(str(exc)) from exc
                for e in accepted:
                    self._index(e)
        return {"accepted": len(accepted), "duplicates": len(events) - len(accepted)}

    def query_events(
        self,
        course: Optional[str] = None,
        user: Optional[str] = None,
        kind: Optional[EventKind] = None,
        start: Optional[datetime] = None,
        end: Optional[datetime] = None,
        week: Optional[int] = None,
    ) -> list[Event]:
        """Events matching all supplied predicates, ordered by (at, user).

        The week filter needs a course (weeks are relative to its start date).
        """
        cfg = None
        if course is not None:
            cfg = self.course(course)
        if week is not None and cfg is None:
            raise ValueError("week filter requires a course filter")
        if course is not None and user is not None:
            candidates = list(self._by_course_user.get((course, user), ()))
        else:
            candidates = list(self._events)  # snapshot of the append-only list
        out = []
        for e in candidates:
            if course is not None and e.course_id != course:
                continue
            if user is not None and e.user_id != user:
                continue
            if kind is not None and e.kind != kind:
                continue
            if start is not None and e.at < start:
                continue
            if end is not None and e.at >= end:
                continue
            if week is not None and week_of(cfg, e.at) != week:
                continue
            out.append(e)
        out.sort(key=lambda e: (e.at, e.user_id, e.kind.value, payload_digest(e.payload)))
        return out

    # ------------------------------------------------------------------
    # table projections

    def export_table(self, kind: str) -> Table:
        if kind not in TABLE_KINDS:
            raise UnknownTableKind(kind)
        return getattr(self, f"_table_{kind}")()

    def _table_courses(self) -> Table:
        header = ["course_id", "title", "start", "duration_weeks",
                  "pass_threshold_pct", "max_quiz_attempts"]
        rows = [
            [c.course_id, c.title, c.start.isoformat(), str(c.duration_weeks),
             _num(c.pass_threshold_pct), str(c.max_quiz_attempts)]
            for c in sorted(self.courses.values(), key=lambda c: c.course_id)
        ]
        return Table(header, rows)

    def _table_students(self) -> Table:
        header = ["user_id", "courses", "attributes"]
        rows = [
            [s.user_id, ";".join(sorted(s.course_ids)),
             ";".join(f"{k}={v}" for k, v in sorted(s.attributes.items()))]
            for s in sorted(self.students.values(), key=lambda s: s.user_id)
        ]
        return Table(header, rows)

    def _event_rows(self, kind: EventKind, fields: list[str]) -> list[list[str]]:
        rows = []
        for e in self.query_events(kind=kind):
            rows.append([e.user_id, e.course_id, _at_text(e.at)]
                        + [str(e.payload.get(f, "")) for f in fields])
        return rows

    def _table_logins(self) -> Table:
        return Table(["user", "course", "at"], self._event_rows(EventKind.LOGIN, []))

    def _table_forum_reads(self) -> Table:
        return Table(["user", "course", "at", "thread_id"],
                     self._event_rows(EventKind.FORUM_READ, ["thread_id"]))

    def _table_forum_posts(self) -> Table:
        return Table(["user", "course", "at", "thread_id"],
                     self._event_rows(EventKind.FORUM_POST, ["thread_id"]))

    def _table_forums(self) -> Table:
        stats: dict[tuple, list[int]] = {}
        for e in self.query_events(kind=EventKind.FORUM_READ):
            stats.setdefault((e.course_id, str(e.payload.get("thread_id", ""))), [0, 0])[0] += 1
        for e in self.query_events(kind=EventKind.FORUM_POST):
            stats.setdefault((e.course_id, str(e.payload.get("thread_id", ""))), [0, 0])[1] += 1
        rows = [[c, t, str(r), str(p)] for (c, t), (r, p) in sorted(stats.items())]
        return Table(["course", "thread_id", "reads", "posts"], rows)

    def _table_quiz_attempts(self) -> Table:
        rows = []
        for e in self.query_events(kind=EventKind.QUIZ_ATTEMPT):
            rows.append([
                e.user_id, e.course_id, _at_text(e.at),
                str(e.payload.get("quiz_id", "")),
                str(e.payload.get("attempt_no", "")),
                _num(e.payload.get("score_pct", "")),
            ])
        return Table(["user", "course", "at", "quiz_id", "attempt_no", "score_pct"], rows)

    def _table_quizzes(self) -> Table:
        stats: dict[tuple, list] = {}
        for e in self.query_events(kind=EventKind.QUIZ_ATTEMPT):
            key = (e.course_id, str(e.payload.get("quiz_id", "")))
            entry = stats.setdefault(key, [0, set(), 0.0])
            entry[0] += 1
            entry[1].add(e.user_id)
            entry[2] += float(e.payload.get("score_pct", 0.0))
        rows = [
            [c, q, str(n), str(len(users)), f"{total / n:.2f}"]
            for (c, q), (n, users, total) in sorted(stats.items())
        ]
        return Table(["course", "quiz_id", "attempts", "distinct_users", "mean_score"], rows)

    def _table_video_events(self) -> Table:
        rows = []
        for e in self.query_events():
            if e.kind not in (EventKind.VIDEO_PLAY, EventKind.VIDEO_PAUSE, EventKind.VIDEO_COMPLETE):
                continue
            rows.append([
                e.user_id, e.course_id, _at_text(e.at), e.kind.value,
                str(e.payload.get("video_id", "")),
                str(e.payload.get("position_seconds", "")),
            ])
        return Table(["user", "course", "at", "kind", "video_id", "position_seconds"], rows)

    def _table_videos(self) -> Table:
        stats: dict[tuple, list] = {}
        for e in self.query_events():
            if e.kind not in (EventKind.VIDEO_PLAY, EventKind.VIDEO_PAUSE, EventKind.VIDEO_COMPLETE):
                continue
            key = (e.course_id, str(e.payload.get("video_id", "")))
            entry = stats.setdefault(key, [0, set()])
            entry[0] += 1
            entry[1].add(e.user_id)
        rows = [[c, v, str(n), str(len(users))] for (c, v), (n, users) in sorted(stats.items())]
        return Table(["course", "video_id", "events", "watchers"], rows)

    def _table_downloads(self) -> Table:
        return Table(["user", "course", "at", "file_id"],
                     self._event_rows(EventKind.FILE_DOWNLOAD, ["file_id"]))

    def _table_files(self) -> Table:
        stats: dict[tuple, list] = {}
        for e in self.query_events(kind=EventKind.FILE_DOWNLOAD):
            key = (e.course_id, str(e.payload.get("file_id", "")))
            entry = stats.setdefault(key, [0, set()])
            entry[0] += 1
            entry[1].add(e.user_id)
        rows = [[c, f, str(n), str(len(users))] for (c, f), (n, users) in sorted(stats.items())]
        return Table(["course", "file_id", "downloads", "distinct_users"], rows)


def _num(x) -> str:
    """Integral floats render without the trailing .0 (stable CSV cells)."""
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)
