"""Raw interaction-log parsing and URL-rule event classification.

The wire format is fixed: records are joined by ``%|`` and the three fields
inside a record (timestamp, username, URL) are joined by ``%\\``. Timestamps
come in three observed variants::

    Mon Mar 16 2015 06:47:44 GMT+0100 (CET)
    Mon Mar 16 2015 08:20:47 GMT+0100 (Mittleurop&#228;ische Zeit)
    Mon Mar 16 2015 06:47:44 GMT+0100

The parenthesized timezone name may be HTML-entity encoded; it is decoded and
discarded — only the numeric ``GMT±HHMM`` offset is trusted for arithmetic.

Classification is driven by an ordered rule set (first match wins). Rules are
user-supplied configuration; `default_rules` ships a documented reference URL
scheme so the parser stays platform-portable.
"""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from fnmatch import fnmatchcase
from pathlib import Path
from typing import Iterable, Optional

from .errors import UnparsableTimestamp

RECORD_SEP = "%|"
FIELD_SEP = "%\\"


class EventKind(str, Enum):
    LOGIN = "Login"
    FORUM_READ = "ForumRead"
    FORUM_POST = "ForumPost"
    VIDEO_PLAY = "VideoPlay"
    VIDEO_PAUSE = "VideoPause"
    VIDEO_COMPLETE = "VideoComplete"
    QUIZ_ATTEMPT = "QuizAttempt"
    FILE_DOWNLOAD = "FileDownload"
    CERTIFICATE = "Certificate"
    UNCLASSIFIED = "Unclassified"


VIDEO_KINDS = (EventKind.VIDEO_PLAY, EventKind.VIDEO_PAUSE, EventKind.VIDEO_COMPLETE)


@dataclass(frozen=True)
class RawLogRecord:
    timestamp_text: str
    username: str
    url: str


@dataclass(frozen=True)
class Event:
    course_id: str
    user_id: str
    kind: EventKind
    at: datetime  # UTC, seconds precision
    payload: dict = field(default_factory=dict)


_TS_RE = re.compile(
    r"^\s*\w{3} (?P<mon>\w{3}) (?P<day>\d{1,2}) (?P<year>\d{4}) "
    r"(?P<h>\d{2}):(?P<m>\d{2}):(?P<s>\d{2}) "
    r"GMT(?P<sign>[+-])(?P<oh>\d{2})(?P<om>\d{2})"
    r"(?: \((?P<name>[^)]*)\))?\s*$"
)

_MONTHS = {
    "Jan": 1, "Feb": 2, "Mar": 3, "Apr": 4, "May": 5, "Jun": 6,
    "Jul": 7, "Aug": 8, "Sep": 9, "Oct": 10, "Nov": 11, "Dec": 12,
}


def normalize_timestamp(timestamp_text: str) -> datetime:
    """Shift a log timestamp to UTC using its explicit GMT±HHMM offset.

    Raises UnparsableTimestamp if the pattern or the offset is absent.
    """
    m = _TS_RE.match(html.unescape(timestamp_text))
    if m is None:
        raise UnparsableTimestamp(timestamp_text)
    mon = _MONTHS.get(m.group("mon"))
    if mon is None:
        raise UnparsableTimestamp(timestamp_text)
    try:
        local = datetime(
            int(m.group("year")), mon, int(m.group("day")),
            int(m.group("h")), int(m.group("m")), int(m.group("s")),
        )
    except ValueError:
        raise UnparsableTimestamp(timestamp_text) from None
    offset = timedelta(hours=int(m.group("oh")), minutes=int(m.group("om")))
    if m.group("sign") == "-":
        offset = -offset
    return (local - offset).replace(tzinfo=timezone.utc)


def parse_log(text: str) -> tuple[list[RawLogRecord], list[str]]:
    """Split raw log text into well-formed records and rejected fragments.

    Fragments are the non-blank pieces between ``%|`` separators; a fragment
    is accepted only if it splits on ``%\\`` into exactly three non-empty
    fields. Malformed fragments never abort the parse: they land in the
    reject list, and |fragments| == |records| + |rejects|.
    """
    records: list[RawLogRecord] = []
    rejects: list[str] = []
    for fragment in text.split(RECORD_SEP):
        if not fragment.strip():
            continue
        parts = fragment.split(FIELD_SEP)
        if len(parts) != 3 or not all(p.strip() for p in parts):
            rejects.append(fragment)
            continue
        records.append(RawLogRecord(parts[0], parts[1], parts[2]))
    return records, rejects


def serialize_records(records: Iterable[RawLogRecord]) -> str:
    """Render records back to the ``%\\``/``%|`` wire format."""
    return RECORD_SEP.join(
        FIELD_SEP.join((r.timestamp_text, r.username, r.url)) for r in records
    )


@dataclass(frozen=True)
class ClassificationRule:
    """One ordered rule: URL pattern -> event kind (+ payload extraction).

    `pattern` is a substring test unless it contains glob metacharacters
    (``*`` or ``?``), in which case it is an anchored glob over the full URL.
    `extract` is an optional regex whose named groups become payload fields;
    numeric fields (score_pct, attempt_no, position_seconds, delay_seconds)
    are coerced and validated.
    """

    pattern: str
    kind: EventKind
    extract: Optional[str] = None

    def matches(self, url: str) -> bool:
        if "*" in self.pattern or "?" in self.pattern:
            return fnmatchcase(url, self.pattern)
        return self.pattern in url

    def payload_for(self, url: str) -> Optional[dict]:
        """Extract and coerce payload fields; None signals a bad payload."""
        if self.extract is None:
            return {}
        m = re.search(self.extract, url)
        if m is None:
            return None
        payload = {k: v for k, v in m.groupdict().items() if v is not None}
        try:
            return _coerce_payload(payload)
        except (ValueError, TypeError):
            return None


_INT_FIELDS = ("attempt_no", "position_seconds")
_FLOAT_FIELDS = ("score_pct", "delay_seconds")


def _coerce_payload(payload: dict) -> dict:
    for key in _INT_FIELDS:
        if key in payload:
            payload[key] = int(payload[key])
    for key in _FLOAT_FIELDS:
        if key in payload:
            payload[key] = float(payload[key])
    if "score_pct" in payload and not 0 <= payload["score_pct"] <= 100:
        raise ValueError("score_pct out of range")
    if "attempt_no" in payload and payload["attempt_no"] < 1:
        raise ValueError("attempt_no < 1")
    if "position_seconds" in payload and payload["position_seconds"] < 0:
        raise ValueError("position_seconds < 0")
    return payload


@dataclass
class ClassificationRuleSet:
    """Ordered rules; first match wins, evaluation order is list order."""

    rules: list[ClassificationRule]

    @classmethod
    def from_json(cls, text: str) -> "ClassificationRuleSet":
        doc = json.loads(text)
        rules = [
            ClassificationRule(
                pattern=r["pattern"],
                kind=EventKind(r["kind"]),
                extract=r.get("extract"),
            )
            for r in doc["rules"]
        ]
        return cls(rules)

    @classmethod
    def load(cls, path: str | Path) -> "ClassificationRuleSet":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def to_json(self) -> str:
        return json.dumps(
            {
                "rules": [
                    {"pattern": r.pattern, "kind": r.kind.value,
                     **({"extract": r.extract} if r.extract else {})}
                    for r in self.rules
                ]
            },
            indent=2,
        )


def default_rules() -> ClassificationRuleSet:
    """Reference URL scheme: https://host/course/{cid}/<activity>...

    The platform's real URL keywords are deployment-specific; this set
    documents one coherent scheme and is meant to be replaced per platform.
    """
    return ClassificationRuleSet(
        [
            ClassificationRule("/login", EventKind.LOGIN),
            ClassificationRule(
                "*/forum/thread/*/read*", EventKind.FORUM_READ,
                extract=r"/forum/thread/(?P<thread_id>[^/?#]+)/read",
            ),
            ClassificationRule(
                "*/forum/thread/*/post*", EventKind.FORUM_POST,
                extract=r"/forum/thread/(?P<thread_id>[^/?#]+)/post",
            ),
            ClassificationRule(
                "*/video/*action=play*", EventKind.VIDEO_PLAY,
                extract=r"/video/(?P<video_id>[^/?#]+)\?.*pos=(?P<position_seconds>\d+)",
            ),
            ClassificationRule(
                "*/video/*action=pause*", EventKind.VIDEO_PAUSE,
                extract=r"/video/(?P<video_id>[^/?#]+)\?.*pos=(?P<position_seconds>\d+)",
            ),
            ClassificationRule(
                "*/video/*action=complete*", EventKind.VIDEO_COMPLETE,
                extract=r"/video/(?P<video_id>[^/?#]+)\?.*pos=(?P<position_seconds>\d+)",
            ),
            ClassificationRule(
                "/quiz/", EventKind.QUIZ_ATTEMPT,
                extract=(
                    r"/quiz/(?P<quiz_id>[^/?#]+)/attempt/(?P<attempt_no>\d+)"
                    r"\?score=(?P<score_pct>\d+(?:\.\d+)?)"
                    r"(?:&delay=(?P<delay_seconds>\d+(?:\.\d+)?))?"
                ),
            ),
            ClassificationRule(
                "/file/", EventKind.FILE_DOWNLOAD,
                extract=r"/file/(?P<file_id>[^/?#]+)/download",
            ),
            ClassificationRule("/certificate", EventKind.CERTIFICATE),
        ]
    )


def classify_event(
    record: RawLogRecord,
    rules: ClassificationRuleSet,
    course_map: dict[str, str],
) -> Event:
    """Classify one record into a typed event via the first matching rule.

    `course_map` maps URL substrings to course ids (the empty-string key is a
    catch-all); unmatched URLs get an empty course id. URLs matching no rule —
    or whose payload extraction fails validation — become Unclassified with
    the original URL preserved. UnparsableTimestamp propagates.
    """
    at = normalize_timestamp(record.timestamp_text)
    course_id = ""
    for pattern, cid in course_map.items():
        if pattern in record.url:
            course_id = cid
            break
    for rule in rules.rules:
        if not rule.matches(record.url):
            continue
        payload = rule.payload_for(record.url)
        if payload is None:
            break  # matched but unextractable: fall through to Unclassified
        return Event(course_id, record.username, rule.kind, at, payload)
    return Event(
        course_id, record.username, EventKind.UNCLASSIFIED, at, {"url": record.url}
    )
