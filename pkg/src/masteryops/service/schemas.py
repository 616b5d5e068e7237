"""Wire models. All timestamps are UTC epoch milliseconds."""
from __future__ import annotations

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str


class SubmitRequestBody(BaseModel):
    students: list[str] = Field(min_length=1, max_length=2)
    achievements: list[str]


class VerdictEntry(BaseModel):
    student: str
    achievement: str
    verdict: str  # pass | fail | pushback


class GradingSheetBody(BaseModel):
    verdicts: list[VerdictEntry]


class CorrectionBody(BaseModel):
    student: str
    achievement: str
    direction: str  # pass | revoke
    note: str


class OpenSessionBody(BaseModel):
    id: str
    opens_at: int
    closes_at: int
    examiners: list[str]


class RequestView(BaseModel):
    id: str
    state: str
    session: str
    students: list[str]
    requested: list[str]
    rechecks: dict[str, list[str]]
    submitted_at: int
    claimed_at: int | None = None
    completed_at: int | None = None
    claimed_by: str | None = None
    position: int | None = None


class FeedEntryView(BaseModel):
    request: str
    students: list[str]
    requested: list[str]
    rechecks: dict[str, list[str]]
    submitted_at: int
    wait_ms: int
    position: int


class BurndownView(BaseModel):
    target: str
    ideal: list[tuple[int, float]]
    actual: list[tuple[int, int]]


class ProgressView(BaseModel):
    student: str
    passed: list[str]
    grade: str | None
    attainable: list[str]
    attempts_used: int
    pending_rechecks: list[str]
    burndown: BurndownView


class DurationStatsView(BaseModel):
    count: int
    mean_ms: float | None = None
    median_ms: float | None = None
    p90_ms: float | None = None
    max_ms: float | None = None


class WaitStatsView(BaseModel):
    total: DurationStatsView
    queue_only: DurationStatsView


class AchievementStatsRow(BaseModel):
    achievement: str
    attempts: int
    passes: int
    fails: int
    pushbacks: int
    recheck_passes: int
    recheck_fails: int
    students_passed: int


class CohortRow(BaseModel):
    student: str
    passed_count: int
    grade: str | None
    attainable: list[str]


class SessionView(BaseModel):
    id: str
    opens_at: int
    closes_at: int
    examiners: list[str]
    open: bool


class CancelledView(BaseModel):
    cancelled: int


class HealthView(BaseModel):
    status: str
    students: int
    events: int
    open_session: str | None


class AcceptedView(BaseModel):
    ok: bool = True
