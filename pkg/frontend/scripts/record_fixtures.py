"""Record service payloads as dashboard test fixtures.

Plants a small deterministic course through the analytics engine and saves
the JSON bodies the dashboard consumes. Rerun after any payload-schema
change:

    python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from moocmetrics import payloads
from moocmetrics.eventstore import CourseConfig, EventStore, StudentRecord
from moocmetrics.logparse import Event, EventKind

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def plant(store: EventStore) -> None:
    cfg = CourseConfig(
        course_id="gol",
        title="Free Online Learning",
        start=date(2014, 10, 20),
        duration_weeks=8,
        pass_threshold_pct=50.0,
    )
    store.register_course(cfg)
    start = datetime(2014, 10, 20, tzinfo=timezone.utc)
    seq = 0
    events = []

    def emit(user, kind, week, **payload):
        nonlocal seq
        at = start + timedelta(days=7 * (week - 1), seconds=seq)
        seq += 1
        events.append(Event("gol", user, kind, at, payload))

    students = []
    # the profiled student: 3 quiz attempts with rising scores, 2 videos,
    # a download, and weekly logins/reads/posts
    students.append(StudentRecord("mki", {"gol"}, {"population": "undergrad"}))
    for week, score in ((1, 55.0), (2, 70.0), (3, 90.0)):
        emit("mki", EventKind.QUIZ_ATTEMPT, week, quiz_id="q1",
             attempt_no=week, score_pct=score)
    emit("mki", EventKind.VIDEO_PLAY, 1, video_id="v1", position_seconds=0)
    emit("mki", EventKind.VIDEO_PAUSE, 1, video_id="v1", position_seconds=180)
    emit("mki", EventKind.VIDEO_PLAY, 2, video_id="v2", position_seconds=0)
    emit("mki", EventKind.FILE_DOWNLOAD, 1, file_id="slides-week1")
    for week in (1, 2, 3):
        emit("mki", EventKind.LOGIN, week)
        emit("mki", EventKind.FORUM_READ, week, thread_id=f"t{week}")
        emit("mki", EventKind.FORUM_READ, week, thread_id=f"t{week + 1}")
    emit("mki", EventKind.FORUM_POST, 2, thread_id="t2")
    emit("mki", EventKind.CERTIFICATE, 8)

    # cohort around them: readers who quiz more the more they read
    for i, reads in enumerate((2, 4, 6, 8, 10, 12)):
        uid = f"peer{i}"
        students.append(StudentRecord(uid, {"gol"}, {"population": "undergrad"}))
        for j in range(reads):
            emit(uid, EventKind.FORUM_READ, 1 + j % 4, thread_id=f"t{j}")
        emit(uid, EventKind.LOGIN, 1)
        emit(uid, EventKind.QUIZ_ATTEMPT, 2, quiz_id="q1", attempt_no=1,
             score_pct=float(40 + 5 * reads))
    # one inactive registrant
    students.append(StudentRecord("idle", {"gol"}, {"population": "undergrad"}))

    store.register_students(students)
    store.append_events(events)


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = EventStore(tmp)
        plant(store)
        recorded = {
            "courses.json": [payloads.course_payload(store, "gol")],
            "summary.json": payloads.summary_payload(store, "gol"),
            "profile.json": payloads.profile_payload(store, "gol", "mki"),
            "comparison.json": payloads.comparison_payload(
                store, "gol", "forum_reads", "quiz_score"),
            "battery.json": payloads.battery_payload(store, "gol", 2),
            "retention.json": payloads.retention_payload(store, "gol", "v1"),
        }
        for name, body in recorded.items():
            path = FIXTURES / name
            path.write_text(json.dumps(body, indent=2, default=str) + "\n",
                            encoding="utf-8")
            print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
