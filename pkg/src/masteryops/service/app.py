"""HTTP service: the queue, ledger, planning and analytics over a wire API.

Every mutation is appended (and fsynced) to the ledger before the 2xx goes
out. All mutations funnel through one writer lock; if the writer is busy
longer than the configured timeout the request is answered with a
retry-later error instead of queueing unboundedly.
"""
from __future__ import annotations

import threading
import time
from contextlib import contextmanager
from pathlib import Path

from fastapi import Depends, FastAPI, Header, Request
from fastapi.responses import JSONResponse

from .. import analytics
from ..catalog import (
    CourseCatalog,
    attainable_grades,
    catalog_from_dict,
    catalog_to_dict,
    compute_grade,
    dump_catalog,
    load_catalog,
    validate_catalog,
)
from ..labqueue import (
    DemonstrationQueue,
    NotParticipantError,
    QueueError,
    UnknownRequestError,
)
from ..ledger import Ledger, apply_correction, load_events
from ..planning import (
    CourseSchedule,
    actual_burndown,
    dump_schedule,
    load_schedule,
    schedule_from_dict,
)
from .auth import ApiSession, load_tokens
from .config import ServiceConfig
from .schemas import (
    AcceptedView,
    AchievementStatsRow,
    BurndownView,
    CancelledView,
    CohortRow,
    CorrectionBody,
    DurationStatsView,
    ErrorBody,
    FeedEntryView,
    GradingSheetBody,
    HealthView,
    OpenSessionBody,
    ProgressView,
    RequestView,
    SessionView,
    SubmitRequestBody,
    WaitStatsView,
)

import random


class AuthError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


class RetryLaterError(Exception):
    pass


class Runtime:
    """Shared state behind the endpoints; one writer, many readers."""

    def __init__(
        self,
        catalog: CourseCatalog,
        schedule: CourseSchedule,
        ledger: Ledger,
        tokens: dict[str, ApiSession],
        config: ServiceConfig,
        clock=None,
    ):
        self.catalog = catalog
        self.schedule = schedule
        self.ledger = ledger
        self.tokens = tokens
        self.config = config
        self.clock = clock or (lambda: int(time.time() * 1000))
        self.queue = DemonstrationQueue(
            ledger, catalog, config.policy, random.Random(config.seed)
        )
        self.write_lock = threading.Lock()

    def now(self) -> int:
        return self.clock()

    def swap_catalog(self, catalog: CourseCatalog) -> None:
        self.catalog = catalog
        self.queue.catalog = catalog


def create_app(config: ServiceConfig, clock=None) -> FastAPI:
    """Build the service; refuses to start on a corrupt or truncated ledger."""
    catalog = load_catalog(config.catalog)
    report = validate_catalog(catalog)
    if not report.ok:
        raise ValueError("catalog invalid:\n" + "\n".join(report.lines()))
    schedule = load_schedule(config.schedule)
    tokens = load_tokens(config.tokens)
    if Path(config.ledger).exists():
        ledger = Ledger(load_events(config.ledger), path=config.ledger)
    else:
        ledger = Ledger(path=config.ledger)
    runtime = Runtime(catalog, schedule, ledger, tokens, config, clock)
    return build_app(runtime)


def build_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="masteryops", docs_url=None, redoc_url=None)
    app.state.runtime = runtime

    def authenticate(authorization: str | None = Header(default=None)) -> ApiSession:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthError(401, "NotAuthenticated", "bearer token required")
        session = runtime.tokens.get(authorization.removeprefix("Bearer "))
        if session is None:
            raise AuthError(401, "NotAuthenticated", "unknown token")
        return session

    def require(*roles: str):
        def check(session: ApiSession = Depends(authenticate)) -> ApiSession:
            if session.role not in roles:
                raise AuthError(403, "NotAuthorized", f"requires role in {roles}")
            return session

        return check

    @contextmanager
    def mutate():
        acquired = runtime.write_lock.acquire(
            timeout=runtime.config.write_lock_timeout_ms / 1000.0
        )
        if not acquired:
            raise RetryLaterError("writer busy, retry later")
        try:
            yield
        finally:
            runtime.write_lock.release()

    @app.exception_handler(AuthError)
    async def _auth_error(_request: Request, exc: AuthError):
        return JSONResponse(
            status_code=exc.status,
            content=ErrorBody(code=exc.code, message=str(exc)).model_dump(),
        )

    @app.exception_handler(QueueError)
    async def _queue_error(_request: Request, exc: QueueError):
        if isinstance(exc, UnknownRequestError):
            status = 404
        elif isinstance(exc, NotParticipantError):
            status = 403
        else:
            status = 409
        return JSONResponse(
            status_code=status,
            content=ErrorBody(code=exc.code, message=str(exc)).model_dump(),
        )

    @app.exception_handler(RetryLaterError)
    async def _retry_later(_request: Request, exc: RetryLaterError):
        return JSONResponse(
            status_code=503,
            content=ErrorBody(code="RetryLater", message=str(exc)).model_dump(),
        )

    def request_view(request_id: str) -> RequestView:
        request = runtime.queue._request(request_id)
        position = None
        if request.state == "pending":
            position = runtime.queue.queue_position(request_id)
        return RequestView(
            id=request.id,
            state=request.state,
            session=request.session,
            students=list(request.students),
            requested=list(request.requested),
            rechecks={s: list(a) for s, a in request.rechecks.items()},
            submitted_at=request.submitted_at,
            claimed_at=request.claimed_at,
            completed_at=request.completed_at,
            claimed_by=request.claimed_by,
            position=position,
        )

    # -- health ---------------------------------------------------------------

    @app.get("/health", response_model=HealthView)
    def health():  # public by design: load balancers poll it
        state = runtime.ledger.state
        return HealthView(
            status="ok",
            students=len(state.students),
            events=len(runtime.ledger.records),
            open_session=state.open_session_id,
        )

    @app.get("/catalog")
    def get_catalog(session: ApiSession = Depends(require("student", "examiner", "admin"))):
        return catalog_to_dict(runtime.catalog)

    @app.get("/policy")
    def get_policy(session: ApiSession = Depends(require("student", "examiner", "admin"))):
        policy = runtime.config.policy
        return {
            "per_attempt_cap": policy.per_attempt_cap,
            "attempt_budget": policy.attempt_budget,
            "per_session_attempt_cap": policy.per_session_attempt_cap,
        }

    # -- student side -----------------------------------------------------------

    @app.post("/requests", response_model=RequestView, status_code=201)
    def submit_request(
        body: SubmitRequestBody, session: ApiSession = Depends(require("student"))
    ):
        if session.actor not in body.students:
            raise AuthError(403, "NotAuthorized", "submitting student must be listed")
        with mutate():
            request = runtime.queue.submit_request(
                body.students, body.achievements, runtime.now()
            )
        return request_view(request.id)

    @app.delete("/requests/{request_id}", response_model=AcceptedView)
    def cancel_request(request_id: str, session: ApiSession = Depends(require("student"))):
        with mutate():
            runtime.queue.cancel_request(request_id, runtime.now(), student=session.actor)
        return AcceptedView()

    @app.get("/requests/{request_id}", response_model=RequestView)
    def get_request(
        request_id: str,
        session: ApiSession = Depends(require("student", "examiner", "admin")),
    ):
        return request_view(request_id)

    @app.get("/students/{student_id}/progress", response_model=ProgressView)
    def progress(
        student_id: str,
        target: str | None = None,
        session: ApiSession = Depends(require("student", "examiner", "admin")),
    ):
        state = runtime.ledger.state
        record = state.students.get(student_id)
        # score against the current catalog: uploads may have retired ids
        passed = (set(record.passed) & runtime.catalog.ids()) if record else set()
        attempts_used = record.attempts_used if record else 0
        pending = list(record.pending_rechecks) if record else []
        target_level = target or runtime.catalog.levels[-1]
        series = actual_burndown(
            runtime.ledger.records, student_id, target_level, runtime.catalog, runtime.schedule
        )
        policy = runtime.config.policy
        reachable = attainable_grades(
            passed,
            max(0, policy.attempt_budget - attempts_used),
            policy.per_attempt_cap,
            runtime.catalog,
        )
        return ProgressView(
            student=student_id,
            passed=sorted(passed),
            grade=compute_grade(passed, runtime.catalog),
            attainable=[l for l in runtime.catalog.levels if l in reachable],
            attempts_used=attempts_used,
            pending_rechecks=pending,
            burndown=BurndownView(
                target=target_level,
                ideal=list(series.ideal.points()),
                actual=list(series.points),
            ),
        )

    # -- examiner side ------------------------------------------------------------

    @app.get("/feed", response_model=list[FeedEntryView])
    def feed(session: ApiSession = Depends(require("examiner", "admin"))):
        return [
            FeedEntryView(
                request=e.request,
                students=list(e.students),
                requested=list(e.requested),
                rechecks={s: list(a) for s, a in e.rechecks.items()},
                submitted_at=e.submitted_at,
                wait_ms=e.wait_ms,
                position=e.position,
            )
            for e in runtime.queue.feed(runtime.now())
        ]

    @app.post("/requests/{request_id}/claim", response_model=RequestView)
    def claim(request_id: str, session: ApiSession = Depends(require("examiner"))):
        with mutate():
            runtime.queue.claim(request_id, session.actor, runtime.now())
        return request_view(request_id)

    @app.post("/requests/{request_id}/results", response_model=RequestView)
    def record_results(
        request_id: str,
        body: GradingSheetBody,
        session: ApiSession = Depends(require("examiner")),
    ):
        sheet: dict[str, dict[str, str]] = {}
        for entry in body.verdicts:
            sheet.setdefault(entry.student, {})[entry.achievement] = entry.verdict
        with mutate():
            request = runtime.queue._request(request_id)
            examiners = runtime.ledger.state.sessions[request.session].examiners
            if session.actor not in examiners:
                raise AuthError(403, "NotAuthorized", "not an examiner of this session")
            runtime.queue.record_results(request_id, sheet, runtime.now())
        return request_view(request_id)

    # -- statistics -----------------------------------------------------------------

    @app.get("/stats/waiting", response_model=WaitStatsView)
    def stats_waiting(session: ApiSession = Depends(require("student", "examiner", "admin"))):
        report = analytics.waiting_times(runtime.ledger.records)
        return WaitStatsView(
            total=DurationStatsView(**report.total.__dict__),
            queue_only=DurationStatsView(**report.queue_only.__dict__),
        )

    @app.get("/stats/achievements", response_model=list[AchievementStatsRow])
    def stats_achievements(
        session: ApiSession = Depends(require("student", "examiner", "admin")),
    ):
        rows = analytics.achievement_stats(runtime.ledger.records, runtime.catalog)
        return [AchievementStatsRow(**row.__dict__) for row in rows]

    @app.get("/stats/cohort", response_model=list[CohortRow])
    def stats_cohort(session: ApiSession = Depends(require("student", "examiner", "admin"))):
        rows = analytics.cohort_progress(
            runtime.ledger.records, runtime.catalog, runtime.config.policy
        )
        return [
            CohortRow(
                student=r.student,
                passed_count=r.passed_count,
                grade=r.grade,
                attainable=list(r.attainable),
            )
            for r in rows
        ]

    # -- administration ----------------------------------------------------------------

    @app.post("/admin/corrections", response_model=AcceptedView)
    def corrections(body: CorrectionBody, session: ApiSession = Depends(require("admin"))):
        if body.direction not in ("pass", "revoke"):
            return JSONResponse(
                status_code=422,
                content=ErrorBody(
                    code="InvalidDirection", message="direction must be pass or revoke"
                ).model_dump(),
            )
        with mutate():
            try:
                apply_correction(
                    runtime.ledger,
                    student=body.student,
                    achievement=body.achievement,
                    direction=body.direction,
                    note=body.note,
                    now=runtime.now(),
                    examiner=session.actor,
                )
            except ValueError as exc:
                return JSONResponse(
                    status_code=422,
                    content=ErrorBody(code="InvalidCorrection", message=str(exc)).model_dump(),
                )
        return AcceptedView()

    @app.post("/admin/catalog", response_model=AcceptedView)
    def upload_catalog(body: dict, session: ApiSession = Depends(require("admin"))):
        catalog = catalog_from_dict(body)
        report = validate_catalog(catalog)
        if not report.ok:
            return JSONResponse(
                status_code=409,
                content=ErrorBody(
                    code="InvalidCatalog", message="; ".join(report.lines())
                ).model_dump(),
            )
        with mutate():
            runtime.swap_catalog(catalog)
            if runtime.config.catalog:
                dump_catalog(catalog, runtime.config.catalog)
        return AcceptedView()

    @app.post("/admin/schedule", response_model=AcceptedView)
    def upload_schedule(body: dict, session: ApiSession = Depends(require("admin"))):
        schedule = schedule_from_dict(body)
        with mutate():
            runtime.schedule = schedule
            if runtime.config.schedule:
                dump_schedule(schedule, runtime.config.schedule)
        return AcceptedView()

    @app.post("/admin/sessions/open", response_model=SessionView)
    def open_session(body: OpenSessionBody, session: ApiSession = Depends(require("admin"))):
        with mutate():
            opened = runtime.queue.open_session(
                body.id, body.opens_at, body.closes_at, body.examiners, runtime.now()
            )
        return SessionView(
            id=opened.id,
            opens_at=opened.opens_at,
            closes_at=opened.closes_at,
            examiners=list(opened.examiners),
            open=opened.open,
        )

    @app.post("/admin/sessions/close", response_model=CancelledView)
    def close_session(session: ApiSession = Depends(require("admin"))):
        with mutate():
            cancelled = runtime.queue.close_session(runtime.now())
        return CancelledView(cancelled=cancelled)

    static_dir = runtime.config.static_dir
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
