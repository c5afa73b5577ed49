"""HTTP facade over the analytics pipeline.

JSON over HTTP; response shapes come from `payloads` so the dashboard and
CLI share schemas. Read endpoints are side-effect-free over a store
snapshot; the two mutating endpoints (log ingestion, anonymization upload)
require the static bearer token. Configuration via environment variables:

    MOOCMETRICS_DATA_DIR   store directory (default ./data)
    MOOCMETRICS_TOKEN      bearer token for mutating endpoints
    MOOCMETRICS_ADDR       bind address (default 127.0.0.1:8000)
    MOOCMETRICS_RULES      classification rule file (default: reference rules)
    MOOCMETRICS_CORS       comma-separated allowed origins
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from fastapi import (
    Depends, FastAPI, Form, Header, HTTPException, Query, Request, Response, UploadFile,
)
from fastapi.middleware.cors import CORSMiddleware

from . import payloads
from .anonymizer import AnonymizationRecipe, apply_recipe
from .errors import MoocMetricsError, UnknownCourse, UnknownUser
from .eventstore import CourseConfig, EventStore, StudentRecord
from .logparse import ClassificationRuleSet, classify_event, default_rules, parse_log
from .tabular import parse_csv


@dataclass
class ApiConfig:
    data_dir: str = "data"
    token: str = ""
    addr: str = "127.0.0.1"
    port: int = 8000
    rules_path: Optional[str] = None
    cors_origins: list[str] = field(default_factory=list)

    @classmethod
    def from_env(cls) -> "ApiConfig":
        addr = os.environ.get("MOOCMETRICS_ADDR", "127.0.0.1:8000")
        host, _, port = addr.partition(":")
        return cls(
            data_dir=os.environ.get("MOOCMETRICS_DATA_DIR", "data"),
            token=os.environ.get("MOOCMETRICS_TOKEN", ""),
            addr=host or "127.0.0.1",
            port=int(port or 8000),
            rules_path=os.environ.get("MOOCMETRICS_RULES"),
            cors_origins=[o for o in os.environ.get("MOOCMETRICS_CORS", "").split(",") if o],
        )


def create_app(store: EventStore, cfg: Optional[ApiConfig] = None) -> FastAPI:
    cfg = cfg or ApiConfig()
    rules = (ClassificationRuleSet.load(cfg.rules_path)
             if cfg.rules_path else default_rules())
    app = FastAPI(title="moocmetrics", version="0.1.0")
    if cfg.cors_origins:
        app.add_middleware(
            CORSMiddleware, allow_origins=cfg.cors_origins,
            allow_methods=["*"], allow_headers=["*"],
        )

    def require_token(authorization: str = Header(default="")) -> None:
        if not cfg.token:
            return  # auth disabled (local/dev runs)
        if authorization != f"Bearer {cfg.token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    @app.exception_handler(MoocMetricsError)
    async def domain_error(_, exc: MoocMetricsError):
        status = 404 if isinstance(exc, (UnknownCourse, UnknownUser)) else 422
        return Response(
            content=json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            status_code=status, media_type="application/json",
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/courses")
    def courses():
        return [payloads.course_payload(store, cid) for cid in sorted(store.courses)]

    @app.get("/courses/{course_id}/summary")
    def summary(course_id: str):
        return payloads.summary_payload(store, course_id)

    @app.get("/courses/{course_id}/students/{user_id}/profile")
    def profile(course_id: str, user_id: str):
        return payloads.profile_payload(store, course_id, user_id)

    @app.get("/courses/{course_id}/indicators")
    def indicators_endpoint(course_id: str, x: str = Query(...), y: str = Query(...)):
        try:
            return payloads.comparison_payload(store, course_id, x, y)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/courses/{course_id}/clusters")
    def clusters(course_id: str, population: Optional[str] = None,
                 k: str = "auto", seed: int = 0, standardize: bool = False):
        k_arg: str | int = k if k == "auto" else int(k)
        try:
            return payloads.clusters_payload(
                store, course_id, population, k_arg, seed, standardize)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/courses/{course_id}/dropout-point")
    def dropout(course_id: str, epsilon: float = 0.15, exceedances: int = 0,
                indicator: str = "quiz_attempts"):
        return payloads.dropout_payload(store, course_id, epsilon, exceedances, indicator)

    @app.get("/courses/{course_id}/battery")
    def battery(course_id: str, week: int = Query(...), mode: Optional[str] = None):
        return payloads.battery_payload(store, course_id, week, mode)

    @app.get("/courses/{course_id}/videos/{video_id}/retention")
    def retention(course_id: str, video_id: str, granularity: str = "percent"):
        return payloads.retention_payload(store, course_id, video_id, granularity)

    @app.post("/ingest/logs", dependencies=[Depends(require_token)])
    async def ingest(request: Request, course: str = Query(...),
                     register_students: bool = True):
        text = (await request.body()).decode("utf-8", errors="replace")
        store.course(course)
        records, rejects = parse_log(text)
        course_map = {"": course}
        events = [classify_event(r, rules, course_map) for r in records]
        if register_students:
            for user in sorted({e.user_id for e in events}):
                store.register_student(StudentRecord(user, {course}))
        result = store.append_events(events)
        return {
            "course_id": course,
            "records": len(records),
            "rejects": len(rejects),
            "events": len(events),
            **result,
        }

    @app.post("/anonymize", dependencies=[Depends(require_token)])
    async def anonymize(file: UploadFile, recipe: str = Form(...),
                        delimiter: str = Form(",")):
        try:
            table = parse_csv((await file.read()).decode("utf-8"), delimiter)
            recipe_obj = AnonymizationRecipe.from_json(recipe)
            out = apply_recipe(table, recipe_obj)
        except (ValueError, MoocMetricsError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return Response(content=out.to_csv(), media_type="text/csv")

    return app


def serve(cfg: Optional[ApiConfig] = None) -> None:
    """Run the service until shutdown (store appends are synchronous)."""
    import uvicorn

    cfg = cfg or ApiConfig.from_env()
    store = EventStore(cfg.data_dir)
    app = create_app(store, cfg)
    uvicorn.run(app, host=cfg.addr, port=cfg.port, log_level="info")
