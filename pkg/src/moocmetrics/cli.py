"""Command-line front door for every pipeline stage.

Exit codes: 0 success, 1 domain error (one-line diagnostic on stderr),
2 usage error (argparse). Report commands print CSV by default;
``--format json`` mirrors the service payloads byte for byte, so scripts
and the dashboard consume identical schemas. Every command with
randomness honors ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import date
from pathlib import Path
from typing import Optional

from . import payloads
from .anonymizer import (
    AnonymizationRecipe,
    apply_recipe,
    load_hierarchy,
)
from .errors import MoocMetricsError
from .eventstore import CourseConfig, EventStore, StudentRecord
from .logparse import ClassificationRuleSet, classify_event, default_rules, parse_log
from .synthkit import SeriesShape, UNDERGRAD_SPECS, synth_cohort, synth_logs
from .tabular import load_table


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _print_kv_csv(pairs: list[tuple[str, object]]) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["metric", "value"])
    for key, value in pairs:
        writer.writerow([key, "" if value is None else value])


def _print_rows_csv(header: list[str], rows: list[list]) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _emit(args, payload: dict, csv_fn) -> None:
    if args.format == "json":
        json.dump(payload, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")
    else:
        csv_fn(payload)


def cmd_ingest(args) -> int:
    store = EventStore(args.data)
    if args.course_config:
        doc = json.loads(Path(args.course_config).read_text(encoding="utf-8"))
        store.register_course(CourseConfig.from_json(doc))
    course_id = args.course
    store.course(course_id)
    rules = ClassificationRuleSet.load(args.rules) if args.rules else default_rules()
    if args.roster:
        doc = json.loads(Path(args.roster).read_text(encoding="utf-8"))
        users = doc["users"] if isinstance(doc, dict) else doc
        for user in users:
            store.register_student(StudentRecord(user, {course_id}))
    text = (sys.stdin.read() if args.logfile == "-"
            else Path(args.logfile).read_text(encoding="utf-8"))
    records, rejects = parse_log(text)
    events = [classify_event(r, rules, {"": course_id}) for r in records]
    for user in sorted({e.user_id for e in events}):
        store.register_student(StudentRecord(user, {course_id}))
    result = store.append_events(events)
    print(f"records={len(records)} rejects={len(rejects)} "
          f"accepted={result['accepted']} duplicates={result['duplicates']}")
    return 0


def cmd_report(args) -> int:
    store = EventStore(args.data)
    payload = payloads.summary_payload(store, args.course)

    def as_csv(p):
        pairs = [(k, p[k]) for k in ("registrants", "active", "completers", "certified")]
        pairs += [(k, _round(v)) for k, v in p["ratios"].items()]
        pairs += [(f"dropout_{k}", _round(v)) for k, v in p["dropout_rates"].items()]
        _print_kv_csv(pairs)

    _emit(args, payload, as_csv)
    return 0


def _round(v):
    return None if v is None else round(v, 2)


def cmd_profile(args) -> int:
    store = EventStore(args.data)
    payload = payloads.profile_payload(store, args.course, args.user)

    def as_csv(p):
        header = ["week", "logins", "forum_reads", "forum_posts",
                  "video_events", "quiz_attempts", "downloads", "success_rate"]
        rows = [[r[h] for h in header] for r in p["weekly"]]
        _print_rows_csv(header, rows)

    _emit(args, payload, as_csv)
    return 0


def cmd_cluster(args) -> int:
    store = EventStore(args.data)
    payload = payloads.clusters_payload(
        store, args.course, population=args.population,
        k="auto" if args.k == "auto" else int(args.k),
        seed=args.seed, standardize=args.standardize,
    )

    def as_csv(p):
        _print_rows_csv(["user", "cluster"],
                        [[u, c] for u, c in sorted(p["assignments"].items())])

    _emit(args, payload, as_csv)
    return 0


def cmd_dropout(args) -> int:
    store = EventStore(args.data)
    payload = payloads.dropout_payload(
        store, args.course, args.epsilon, args.exceedances, args.indicator)

    def as_csv(p):
        pairs = [("stabilized", p["stabilized"])]
        if p["week_boundary"]:
            pairs += [("boundary_week", p["week_boundary"][0]),
                      ("boundary_next_week", p["week_boundary"][1])]
        pairs += [(f"week_{i + 1}", v) for i, v in enumerate(p["series"])]
        _print_kv_csv(pairs)

    _emit(args, payload, as_csv)
    return 0


def cmd_battery(args) -> int:
    store = EventStore(args.data)
    payload = payloads.battery_payload(store, args.course, args.week, args.mode)

    def as_csv(p):
        _print_rows_csv(["percent", "count"],
                        [[k, v] for k, v in sorted(p["distribution"].items(),
                                                   key=lambda kv: int(kv[0]))])

    _emit(args, payload, as_csv)
    return 0


def cmd_anonymize(args) -> int:
    if args.recipe:
        recipe = AnonymizationRecipe.from_json(Path(args.recipe).read_text(encoding="utf-8"))
    else:
        if not args.technique:
            raise MoocMetricsError("either --recipe or --technique is required")
        columns = [g.split("+") if "+" in g else g for g in (args.columns or [])]
        columns = [g if isinstance(g, list) else g for g in columns]
        recipe = AnonymizationRecipe(
            technique=args.technique,
            columns=columns,
            key=args.key or "",
            truncation=args.truncation,
            mask_char=args.mask_char,
            mask_mode=args.mask_mode,
            fixed_length=args.fixed_length,
            delta=args.delta,
            seed=args.seed,
            numeric_columns=args.numeric_columns or [],
            k=args.k,
            quasi_identifiers=args.quasi_identifiers or [],
            hierarchy_paths=dict(h.split("=", 1) for h in (args.hierarchy or [])),
            suppression_limit=args.suppression_limit,
            key_store=args.key_store or "",
        )
        recipe.validate()
    table = load_table(args.input, args.delimiter)
    out = apply_recipe(table, recipe)
    if args.output:
        out.save(args.output)
    else:
        sys.stdout.write(out.to_csv())
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    course = CourseConfig(
        course_id=args.course,
        title=f"Synthetic course {args.course}",
        start=date.fromisoformat(args.start),
        duration_weeks=args.weeks,
        pass_threshold_pct=args.threshold,
    )
    cohort = synth_cohort(UNDERGRAD_SPECS, args.students, seed=args.seed)
    bundle = synth_logs(cohort, course, seed=args.seed)
    (out_dir / "logs.txt").write_text(bundle.text, encoding="utf-8")
    truth = dict(bundle.truth)
    truth["roles"] = cohort.roles()
    truth["certified"] = sorted(cohort.certified_users())
    truth["users"] = truth["users"]
    (out_dir / "truth.json").write_text(json.dumps(truth, indent=2), encoding="utf-8")
    (out_dir / "course.json").write_text(
        json.dumps(course.to_json(), indent=2), encoding="utf-8")
    (out_dir / "rules.json").write_text(default_rules().to_json(), encoding="utf-8")
    print(f"wrote logs for {args.students} students to {out_dir}")
    return 0


def cmd_serve(args) -> int:
    from .service import ApiConfig, serve

    cfg = ApiConfig.from_env()
    overrides = _load_config(args.config)
    cfg.data_dir = args.data or overrides.get("data_dir", cfg.data_dir)
    cfg.token = args.token or overrides.get("token", cfg.token)
    if args.addr:
        host, _, port = args.addr.partition(":")
        cfg.addr = host or cfg.addr
        cfg.port = int(port) if port else cfg.port
    serve(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moocmetrics",
        description="Learning analytics over MOOC interaction logs.",
    )
    parser.add_argument("--config", help="JSON config file overriding defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_course=True):
        p.add_argument("--data", default="data", help="store directory")
        if needs_course:
            p.add_argument("--course", required=True, help="course id")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("ingest", help="parse and store a raw log file")
    p.add_argument("logfile", help="raw log file path, or - for stdin")
    p.add_argument("--data", default="data")
    p.add_argument("--course", required=True)
    p.add_argument("--rules", help="classification rule file (JSON)")
    p.add_argument("--course-config", help="register the course from this JSON file")
    p.add_argument("--roster", help="register students listed in this JSON file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("report", help="cohort summary with dropout rates")
    add_common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("profile", help="per-student weekly indicators")
    add_common(p)
    p.add_argument("--user", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("cluster", help="engagement clustering report")
    add_common(p)
    p.add_argument("--k", default="auto", help="cluster count or 'auto'")
    p.add_argument("--population", help="filter on students' population attribute")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--standardize", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("dropout", help="dropout-point detection")
    add_common(p)
    p.add_argument("--epsilon", type=float, default=0.15)
    p.add_argument("--exceedances", type=int, default=0)
    p.add_argument("--indicator", default="quiz_attempts")
    p.set_defaults(func=cmd_dropout)

    p = sub.add_parser("battery", help="weekly activity-battery distribution")
    add_common(p)
    p.add_argument("--week", type=int, required=True)
    p.add_argument("--mode", choices=("paper", "implemented"))
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("anonymize", help="de-identify a CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--delimiter", default=",", choices=(",", ";"))
    p.add_argument("--recipe", help="recipe JSON file (overrides other flags)")
    p.add_argument("--technique",
                   choices=("hash", "suppress", "mask", "swap", "noise",
                            "k-anonymity", "code"))
    p.add_argument("--columns", nargs="*",
                   help="target columns; join with + for a joint group (a+b)")
    p.add_argument("--key", help="hashing key")
    p.add_argument("--truncation", type=int, default=10)
    p.add_argument("--mask-char", default="$")
    p.add_argument("--mask-mode", default="preserve_length",
                   choices=("preserve_length", "fixed"))
    p.add_argument("--fixed-length", type=int, default=8)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--numeric-columns", nargs="*")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--quasi-identifiers", nargs="*")
    p.add_argument("--hierarchy", nargs="*", metavar="COL=PATH")
    p.add_argument("--suppression-limit", type=int, default=0)
    p.add_argument("--key-store")
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("synth", help="generate a synthetic course (logs + truth)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--students", type=int, default=459)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--course", default="synth")
    p.add_argument("--start", default="2015-03-01")
    p.add_argument("--weeks", type=int, default=10)
    p.add_argument("--threshold", type=float, default=75.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--data")
    p.add_argument("--addr", help="host:port")
    p.add_argument("--token")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MoocMetricsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
