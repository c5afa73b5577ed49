from collections import Counter
from datetime import date

import numpy as np
import pytest

from moocmetrics.cohort import DropoutPointConfig, dropout_point
from moocmetrics.errors import InvalidSpec
from moocmetrics.eventstore import EventStore, StudentRecord
from moocmetrics.indicators import weekly_indicators
from moocmetrics.logparse import classify_event, default_rules, parse_log
from moocmetrics.synthkit import (
    ArchetypeSpec,
    SeriesShape,
    UNDERGRAD_SPECS,
    render_log_timestamp,
    synth_cohort,
    synth_logs,
    synth_weekly_series,
)

from .conftest import make_course


def test_cohort_sizes_match_proportions():
    cohort = synth_cohort(UNDERGRAD_SPECS, 459, seed=0)
    sizes = Counter(s.role for s in cohort.students)
    for role, expected in (("Dropout", 95), ("PerfectStudents", 154),
                           ("GamingTheSystem", 206), ("Social", 4)):
        assert abs(sizes[role] - expected) <= 3


def test_cohort_single_spec():
    spec = ArchetypeSpec("Blob", 1.0, {"reading_freq": 10.0}, {"reading_freq": 2.0})
    cohort = synth_cohort([spec], 25, seed=1)
    assert len(cohort.students) == 25
    assert {s.role for s in cohort.students} == {"Blob"}


def test_cohort_seed_deterministic():
    a = synth_cohort(UNDERGRAD_SPECS, 100, seed=7)
    b = synth_cohort(UNDERGRAD_SPECS, 100, seed=7)
    assert a.students == b.students
    c = synth_cohort(UNDERGRAD_SPECS, 100, seed=8)
    assert a.students != c.students


def test_cohort_counts_nonnegative_and_near_means():
    cohort = synth_cohort(UNDERGRAD_SPECS, 459, seed=3)
    assert all(v >= 0 for s in cohort.students for v in s.counts.values())
    # the Perfect group has means far from the truncation boundary, so its
    # sample means land within 3 standard errors
    perfect = [s for s in cohort.students if s.role == "PerfectStudents"]
    spec = UNDERGRAD_SPECS[1]
    for key, mean in spec.means.items():
        sample = np.mean([s.counts[key] for s in perfect])
        se = spec.sds[key] / np.sqrt(len(perfect))
        assert abs(sample - mean) <= 3 * se + 0.5  # 0.5 for integer rounding


def test_cohort_invalid_specs():
    with pytest.raises(InvalidSpec):
        synth_cohort(UNDERGRAD_SPECS, 0)
    bad = [ArchetypeSpec("a", 0.4, {}, {})]
    with pytest.raises(InvalidSpec):
        synth_cohort(bad, 10)


# ----------------------------------------------------------------- series


def test_series_knee_four_detected():
    series = synth_weekly_series(SeriesShape(knee_week=4), weeks=8, seed=0)
    point = dropout_point(series, DropoutPointConfig(epsilon=0.15))
    assert point.week_boundary == (4, 5)


def test_series_knee_two_detected():
    series = synth_weekly_series(SeriesShape(knee_week=2), weeks=8, seed=1)
    point = dropout_point(series, DropoutPointConfig(epsilon=0.15))
    assert point.week_boundary == (2, 3)


def test_series_flat_shape():
    series = synth_weekly_series(SeriesShape(knee_week=1, post_knee_decline=0.02),
                                 weeks=8, seed=2)
    point = dropout_point(series, DropoutPointConfig(epsilon=0.15))
    assert point.week_boundary == (1, 2)


def test_series_declines_bounded_after_knee():
    shape = SeriesShape(start_level=2000, knee_week=3, post_knee_decline=0.05)
    for seed in range(10):
        series = synth_weekly_series(shape, weeks=10, seed=seed)
        for j in range(shape.knee_week - 1, len(series) - 1):
            decline = (series[j] - series[j + 1]) / series[j]
            assert decline <= 0.05 + 1e-9
        for j in range(0, shape.knee_week - 1):
            decline = (series[j] - series[j + 1]) / series[j]
            assert decline > 0.15


def test_series_deterministic():
    shape = SeriesShape()
    assert synth_weekly_series(shape, 8, seed=5) == synth_weekly_series(shape, 8, seed=5)


# ------------------------------------------------------------------- logs


def test_timestamp_render_round_trip():
    from datetime import datetime, timezone

    from moocmetrics.logparse import normalize_timestamp

    at = datetime(2015, 3, 16, 5, 47, 44, tzinfo=timezone.utc)
    for variant in range(3):
        text = render_log_timestamp(at, variant)
        assert normalize_timestamp(text) == at


def test_logs_empty_cohort():
    cohort = synth_cohort([ArchetypeSpec("x", 1.0, {}, {})], 1, seed=0)
    cohort.students = []
    bundle = synth_logs(cohort, make_course(course_id="c"), seed=0)
    assert bundle.text == ""


def test_logs_recover_planted_logins(tmp_path):
    spec = ArchetypeSpec("only-logins", 1.0, {"logins": 3.0}, {"logins": 0.0})
    cohort = synth_cohort([spec], 1, seed=0)
    course = make_course(course_id="c")
    bundle = synth_logs(cohort, course, seed=0)
    records, rejects = parse_log(bundle.text)
    assert rejects == []
    store = EventStore(tmp_path / "s")
    store.register_course(course)
    store.register_student(StudentRecord("u00000", {"c"}))
    events = [classify_event(r, default_rules(), {"": "c"}) for r in records]
    result = store.append_events(events)
    assert result == {"accepted": 3, "duplicates": 0}
    rows = weekly_indicators(store, "c", "u00000")
    assert sum(r.logins for r in rows) == 3 == bundle.truth["totals"]["logins"]


def test_logs_cycle_timestamp_variants():
    spec = ArchetypeSpec("x", 1.0, {"logins": 9.0}, {"logins": 0.0})
    cohort = synth_cohort([spec], 1, seed=0)
    bundle = synth_logs(cohort, make_course(course_id="c"), seed=0)
    assert "(CET)" in bundle.text
    assert "Mittleurop&#228;ische Zeit" in bundle.text
    assert "GMT+0000" in bundle.text


def test_logs_full_conservation(tmp_path):
    """Every planted per-user count equals the pipeline-recovered count."""
    specs = [
        ArchetypeSpec("busy", 0.5,
                      {"logins": 4, "reading_freq": 6, "writing_freq": 2,
                       "videos_watched": 3, "quiz_attempts": 7, "downloads": 2},
                      {k: 1.0 for k in ("logins", "reading_freq", "writing_freq",
                                        "videos_watched", "quiz_attempts", "downloads")},
                      certification_probability=1.0),
        ArchetypeSpec("quiet", 0.5, {"reading_freq": 1}, {"reading_freq": 1.0}),
    ]
    cohort = synth_cohort(specs, 20, seed=4)
    course = make_course(course_id="c", weeks=8)
    bundle = synth_logs(cohort, course, seed=4)
    records, rejects = parse_log(bundle.text)
    assert rejects == []
    store = EventStore(tmp_path / "s")
    store.register_course(course)
    store.register_students(
        [StudentRecord(s.user_id, {"c"}) for s in cohort.students])
    events = [classify_event(r, default_rules(), {"": "c"}) for r in records]
    result = store.append_events(events)
    assert result["duplicates"] == 0
    for student in cohort.students:
        rows = weekly_indicators(store, "c", student.user_id)
        truth = bundle.truth["users"][student.user_id]
        for name in ("logins", "forum_reads", "forum_posts", "video_events",
                     "quiz_attempts", "downloads"):
            assert sum(getattr(r, name) for r in rows) == truth[name], \
                (student.user_id, name)


def test_logs_certified_emit_certificate(tmp_path):
    spec = ArchetypeSpec("c", 1.0, {"quiz_attempts": 1}, {},
                         certification_probability=1.0)
    cohort = synth_cohort([spec], 3, seed=0)
    bundle = synth_logs(cohort, make_course(course_id="c"), seed=0)
    assert bundle.text.count("/certificate") == 3
