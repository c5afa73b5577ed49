"""Response-shape builders shared by the HTTP service and `--format json`.

Keeping every payload here means scripts and the dashboard read identical
schemas whether they go through HTTP or the CLI.
"""

from __future__ import annotations

from typing import Optional

from . import clustering, cohort, indicators, motivation
from .eventstore import EventStore
from .logparse import EventKind, VIDEO_KINDS


def course_payload(store: EventStore, course_id: str) -> dict:
    cfg = store.course(course_id)
    return {
        "course_id": cfg.course_id,
        "title": cfg.title,
        "start": cfg.start.isoformat(),
        "duration_weeks": cfg.duration_weeks,
        "pass_threshold_pct": cfg.pass_threshold_pct,
        "max_quiz_attempts": cfg.max_quiz_attempts,
        "registrants": len(store.registrants(course_id)),
    }


def summary_payload(store: EventStore, course_id: str) -> dict:
    summary = cohort.categorize(store, course_id)
    return {
        "course_id": course_id,
        "registrants": summary.registrants,
        "active": summary.active,
        "completers": summary.completers,
        "certified": summary.certified,
        "ratios": summary.ratios(),
        "dropout_rates": cohort.dropout_rates(summary),
    }


def weekly_row(row: indicators.WeeklyIndicators) -> dict:
    return {
        "week": row.week,
        "logins": row.logins,
        "forum_reads": row.forum_reads,
        "forum_posts": row.forum_posts,
        "video_events": row.video_events,
        "quiz_attempts": row.quiz_attempts,
        "downloads": row.downloads,
        "success_rate": cohort.success_rate(row),
    }


def profile_payload(store: EventStore, course_id: str, user_id: str) -> dict:
    cfg = store.course(course_id)
    weekly = indicators.weekly_indicators(store, course_id, user_id)
    quizzes = indicators.quiz_summary(store, course_id, user_id)
    videos: dict[str, int] = {}
    downloads = []
    for e in store.query_events(course=course_id, user=user_id):
        if e.kind in VIDEO_KINDS:
            vid = str(e.payload.get("video_id", ""))
            videos[vid] = videos.get(vid, 0) + 1
        elif e.kind == EventKind.FILE_DOWNLOAD:
            downloads.append({"file_id": str(e.payload.get("file_id", "")),
                              "at": e.at.strftime("%Y-%m-%dT%H:%M:%SZ")})
    battery = []
    for week in range(1, cfg.duration_weeks + 1):
        status = motivation.battery_week(store, course_id, user_id, week)
        battery.append({"week": week, "percent": status.percent,
                        "symbol_id": status.symbol_id, "tooltip": status.tooltip})
    return {
        "course_id": course_id,
        "user_id": user_id,
        "weekly": [weekly_row(r) for r in weekly],
        "quizzes": [
            {"quiz_id": q.quiz_id, "attempts": q.attempts,
             "recorded": q.recorded, "passed": q.passed}
            for q in quizzes
        ],
        "videos": [{"video_id": v, "events": n} for v, n in sorted(videos.items())],
        "downloads": downloads,
        "battery": battery,
    }


INDICATOR_CHOICES = indicators.INDICATOR_NAMES + ("quiz_score",)


def indicator_series(store: EventStore, course_id: str, name: str) -> dict[str, float]:
    """Per-student whole-course value of one comparable indicator."""
    if name not in INDICATOR_CHOICES:
        raise ValueError(f"unknown indicator {name!r}; choose from {INDICATOR_CHOICES}")
    values: dict[str, float] = {}
    for user in store.registrants(course_id):
        if name == "quiz_score":
            summaries = indicators.quiz_summary(store, course_id, user)
            values[user] = (sum(q.recorded for q in summaries) / len(summaries)
                            if summaries else 0.0)
        else:
            total = 0
            for row in indicators.weekly_indicators(store, course_id, user):
                total += getattr(row, name)
            values[user] = float(total)
    return values


def comparison_payload(store: EventStore, course_id: str, x: str, y: str) -> dict:
    if x == y:
        raise ValueError("x and y indicators must differ")
    xs = indicator_series(store, course_id, x)
    ys = indicator_series(store, course_id, y)
    points = [{"user": u, "x": xs[u], "y": ys[u]} for u in sorted(xs)]
    payload = {"course_id": course_id, "x": x, "y": y, "points": points}
    try:
        result = indicators.pearson([p["x"] for p in points], [p["y"] for p in points])
        payload["pearson_r"] = result.r
        payload["ci95"] = list(result.ci95) if result.ci95 else None
    except indicators.DegenerateInput:
        payload["pearson_r"] = None
        payload["ci95"] = None
    return payload


def clusters_payload(
    store: EventStore, course_id: str,
    population: Optional[str] = None,
    k: str | int = "auto",
    seed: int = 0,
    standardize: bool = False,
) -> dict:
    """Cluster report for one subpopulation (attribute `population` filters
    on the students' population attribute; None clusters everyone)."""
    users = store.registrants(course_id)
    if population:
        users = [u for u in users
                 if store.students[u].attributes.get("population") == population]
    vectors = [indicators.engagement_vector(store, course_id, u) for u in users]
    if len(vectors) < 3:
        raise ValueError("need at least 3 students to cluster")
    matrix = clustering.matrix_from_vectors(vectors, standardize=standardize)
    chosen: Optional[clustering.KChoice] = None
    if k == "auto":
        hi = min(6, matrix.n_rows - 1)
        chosen = clustering.choose_k(matrix, (min(3, hi), hi), seed=seed)
        k_value = chosen.k
    else:
        k_value = int(k)
    model = clustering.best_kmeans(matrix, k_value, seed=seed)
    certified = indicators.certificate_holders(store, course_id)
    labeling = clustering.label_clusters(model, matrix, certified)
    cryer = clustering.cryer_map(model, matrix, labeling)
    projection = clustering.pca_projection(matrix)
    return {
        "course_id": course_id,
        "population": population,
        "k": k_value,
        "wss": model.wss_total,
        "wss_curve": {str(kk): v for kk, v in chosen.wss_curve.items()} if chosen else None,
        "variables": matrix.names,
        "clusters": [
            {
                "cluster_id": lbl.cluster_id,
                "size": lbl.size,
                "centroid": model.centroids[lbl.cluster_id].tolist(),
                "scales": lbl.scales,
                "archetype": lbl.archetype,
                "certification_ratio": lbl.certification_ratio,
                "cryer": {
                    "intrinsic": cryer.cells[lbl.cluster_id].intrinsic,
                    "extrinsic": cryer.cells[lbl.cluster_id].extrinsic,
                    "quadrant": cryer.cells[lbl.cluster_id].quadrant,
                    "consistent": cryer.cells[lbl.cluster_id].consistent,
                },
            }
            for lbl in labeling.labels
        ],
        "assignments": {
            matrix.row_ids[i]: int(model.assignments[i]) for i in range(matrix.n_rows)
        },
        "projection": {
            matrix.row_ids[i]: [float(projection[i][0]), float(projection[i][1])]
            for i in range(matrix.n_rows)
        },
    }


def dropout_payload(store: EventStore, course_id: str, epsilon: float = 0.15,
                    exceedances: int = 0, indicator: str = "quiz_attempts") -> dict:
    series = cohort.weekly_course_series(store, course_id, indicator)
    cfg = cohort.DropoutPointConfig(epsilon, exceedances, indicator)
    point = cohort.dropout_point(series, cfg)
    return {
        "course_id": course_id,
        "indicator": indicator,
        "epsilon": epsilon,
        "allowed_exceedances": exceedances,
        "series": series,
        "declines": point.declines,
        "stabilized": point.stabilized,
        "week_boundary": list(point.week_boundary) if point.week_boundary else None,
    }


def battery_payload(store: EventStore, course_id: str, week: int,
                    mode: Optional[str] = None) -> dict:
    cfg = store.course(course_id)
    rules = motivation.BatteryRuleSet(mode or cfg.battery_mode)
    dist = motivation.battery_report(store, course_id, week, rules)
    trend = motivation.activity_ratio_trend(store, course_id)
    return {
        "course_id": course_id,
        "week": week,
        "mode": rules.mode,
        "distribution": {str(p): n for p, n in sorted(dist.items())},
        "active": trend.active,
        "registrants": trend.registrants,
        "active_ratio_pct": trend.overall_ratio,
        "tooltips": {str(p): motivation.tooltip(p, rules) for p in rules.achievable()},
    }


def retention_payload(store: EventStore, course_id: str, video_id: str,
                      granularity: str = "percent") -> dict:
    curve = indicators.video_retention(store, course_id, video_id, granularity)
    return {
        "course_id": course_id,
        "video_id": video_id,
        "granularity": curve.granularity,
        "positions": curve.positions,
        "watchers_at": curve.watchers_at,
        "views_at": curve.views_at,
        "drop_ratio_at": curve.drop_ratio_at,
    }
