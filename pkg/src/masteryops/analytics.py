"""Event-log mining: waiting times, per-achievement counters, cohort progress.

Waiting time is measured from request submission to grade entry, i.e. it
includes the demonstration itself; a queue-only variant (submission to
claim) is reported alongside, clearly labelled. Percentiles use the
nearest-rank method for cross-implementation determinism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .catalog import CourseCatalog, attainable_grades, compute_grade
from .labqueue import QueuePolicy
from .ledger import (
    COMPLETED_STATE,
    Event,
    FAIL,
    OutcomeEvent,
    PASS,
    PUSHBACK,
    RECHECK_FAIL,
    RECHECK_PASS,
    replay_state,
)


@dataclass(frozen=True)
class DurationStats:
    count: int
    mean_ms: float | None = None
    median_ms: float | None = None
    p90_ms: float | None = None
    max_ms: float | None = None


@dataclass(frozen=True)
class WaitReport:
    total: DurationStats  # submission -> grade entry (includes demonstration)
    queue_only: DurationStats  # submission -> claim


def nearest_rank(sorted_values: Sequence[float], percentile: float) -> float:
    """Nearest-rank percentile over a non-empty ascending sequence."""
    if not sorted_values:
        raise ValueError("nearest_rank needs at least one value")
    rank = max(1, math.ceil(percentile / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def _stats(durations: list[float]) -> DurationStats:
    if not durations:
        return DurationStats(count=0)
    ordered = sorted(durations)
    return DurationStats(
        count=len(ordered),
        mean_ms=sum(ordered) / len(ordered),
        median_ms=nearest_rank(ordered, 50),
        p90_ms=nearest_rank(ordered, 90),
        max_ms=ordered[-1],
    )


def waiting_times(
    events: Sequence[Event], window: tuple[int, int] | None = None
) -> WaitReport:
    """Wait statistics over completed requests submitted inside ``window``.

    Cancelled and still-open requests are excluded entirely.
    """
    state = replay_state(events)
    total: list[float] = []
    queue_only: list[float] = []
    for request in state.requests.values():
        if request.state != COMPLETED_STATE:
            continue
        if window is not None and not window[0] <= request.submitted_at <= window[1]:
            continue
        total.append(float(request.completed_at - request.submitted_at))
        queue_only.append(float(request.claimed_at - request.submitted_at))
    return WaitReport(total=_stats(total), queue_only=_stats(queue_only))


@dataclass(frozen=True)
class AchievementRow:
    achievement: str
    attempts: int  # passes + fails + pushbacks; re-checks counted apart
    passes: int
    fails: int
    pushbacks: int
    recheck_passes: int
    recheck_fails: int
    students_passed: int  # distinct students currently holding a pass


def achievement_stats(
    events: Sequence[Event], catalog: CourseCatalog | None = None
) -> list[AchievementRow]:
    counters: dict[str, dict[str, int]] = {}
    ids: set[str] = set(catalog.ids()) if catalog is not None else set()

    def bucket(achievement_id: str) -> dict[str, int]:
        return counters.setdefault(
            achievement_id,
            {"passes": 0, "fails": 0, "pushbacks": 0, "recheck_passes": 0, "recheck_fails": 0},
        )

    for event in events:
        if not isinstance(event, OutcomeEvent):
            continue
        ids.add(event.achievement)
        if event.verdict == PASS:
            bucket(event.achievement)["passes"] += 1
        elif event.verdict == FAIL:
            bucket(event.achievement)["fails"] += 1
        elif event.verdict == PUSHBACK:
            bucket(event.achievement)["pushbacks"] += 1
        elif event.verdict == RECHECK_PASS:
            bucket(event.achievement)["recheck_passes"] += 1
        elif event.verdict == RECHECK_FAIL:
            bucket(event.achievement)["recheck_fails"] += 1

    records = replay_state(events).students
    rows = []
    for achievement_id in sorted(ids):
        c = counters.get(
            achievement_id,
            {"passes": 0, "fails": 0, "pushbacks": 0, "recheck_passes": 0, "recheck_fails": 0},
        )
        holders = sum(1 for r in records.values() if achievement_id in r.passed)
        rows.append(
            AchievementRow(
                achievement=achievement_id,
                attempts=c["passes"] + c["fails"] + c["pushbacks"],
                passes=c["passes"],
                fails=c["fails"],
                pushbacks=c["pushbacks"],
                recheck_passes=c["recheck_passes"],
                recheck_fails=c["recheck_fails"],
                students_passed=holders,
            )
        )
    return rows


@dataclass(frozen=True)
class ProgressRow:
    student: str
    passed_count: int
    grade: str | None
    attainable: tuple[str, ...]


def cohort_progress(
    events: Sequence[Event],
    catalog: CourseCatalog,
    policy: QueuePolicy | None = None,
) -> list[ProgressRow]:
    """Per-student snapshot: passes, current grade, reachable grades.

    Grades are scored against the current catalog; passes for achievements
    that a later catalog upload removed are ignored rather than treated as
    corrupt input.
    """
    policy = policy or QueuePolicy()
    records = replay_state(events).students
    known_ids = catalog.ids()
    rows = []
    for student, record in sorted(records.items()):
        passed = record.passed & known_ids
        remaining_attempts = max(0, policy.attempt_budget - record.attempts_used)
        reachable = attainable_grades(
            passed, remaining_attempts, policy.per_attempt_cap, catalog
        )
        rows.append(
            ProgressRow(
                student=student,
                passed_count=len(record.passed),
                grade=compute_grade(passed, catalog),
                attainable=tuple(l for l in catalog.levels if l in reachable),
            )
        )
    return rows


# --- tabular rendering (fixed headers, durations in whole seconds) -----------

def _seconds(ms: float | None) -> str:
    return "" if ms is None else str(round(ms / 1000))


def render_waiting(report: WaitReport) -> str:
    lines = ["series\tcount\tmean_s\tmedian_s\tp90_s\tmax_s"]
    for label, stats in (("total", report.total), ("queue_only", report.queue_only)):
        lines.append(
            f"{label}\t{stats.count}\t{_seconds(stats.mean_ms)}\t{_seconds(stats.median_ms)}"
            f"\t{_seconds(stats.p90_ms)}\t{_seconds(stats.max_ms)}"
        )
    return "\n".join(lines) + "\n"


def render_achievements(rows: Sequence[AchievementRow]) -> str:
    lines = ["achievement\tattempts\tpasses\tfails\tpushbacks\trecheck_passes\trecheck_fails\tstudents_passed"]
    for r in rows:
        lines.append(
            f"{r.achievement}\t{r.attempts}\t{r.passes}\t{r.fails}\t{r.pushbacks}"
            f"\t{r.recheck_passes}\t{r.recheck_fails}\t{r.students_passed}"
        )
    return "\n".join(lines) + "\n"


def render_cohort(rows: Sequence[ProgressRow]) -> str:
    lines = ["student\tpassed\tgrade\tattainable"]
    for r in rows:
        grade = r.grade if r.grade is not None else "-"
        lines.append(f"{r.student}\t{r.passed_count}\t{grade}\t{','.join(r.attainable)}")
    return "\n".join(lines) + "\n"
