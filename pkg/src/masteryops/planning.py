"""Phases, sprints, deadlines, derailment flags, burndown and burnup series.

A sprint's soft deadline is its own end; the hard deadline is the end of the
following sprint, or the course end for the final sprint. Missing a hard
deadline flags derailment, which triggers a meeting and nothing else: there
is no penalty semantics anywhere in here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .catalog import CourseCatalog, remaining_for_grade
from .ledger import CORRECTION_PASS, CORRECTION_REVOKE, Event, OutcomeEvent, PASS, replay


class ScheduleError(Exception):
    pass


@dataclass(frozen=True)
class Sprint:
    id: str
    start: int  # epoch ms
    end: int
    assignments: tuple[str, ...] = ()


@dataclass(frozen=True)
class Phase:
    id: str
    name: str
    sprints: tuple[Sprint, ...]


@dataclass(frozen=True)
class CourseSchedule:
    phases: tuple[Phase, ...]

    def __post_init__(self):
        if not self.phases or not any(p.sprints for p in self.phases):
            raise ScheduleError("schedule needs at least one sprint")
        for phase in self.phases:
            previous: Sprint | None = None
            for sprint in phase.sprints:
                if sprint.start >= sprint.end:
                    raise ScheduleError(f"sprint {sprint.id!r} must start before it ends")
                if previous is not None and sprint.start != previous.end:
                    raise ScheduleError(
                        f"sprints {previous.id!r} and {sprint.id!r} must be contiguous"
                    )
                previous = sprint

    def sprints(self) -> list[Sprint]:
        return [s for p in self.phases for s in p.sprints]

    @property
    def course_start(self) -> int:
        return self.sprints()[0].start

    @property
    def course_end(self) -> int:
        return self.sprints()[-1].end

    def soft_deadline(self, sprint: Sprint) -> int:
        return sprint.end

    def hard_deadline(self, sprint: Sprint) -> int:
        flat = self.sprints()
        index = flat.index(sprint)
        if index + 1 < len(flat):
            return flat[index + 1].end
        return self.course_end


@dataclass(frozen=True)
class SprintPlan:
    """A student's declared intentions for one sprint; recorded, never enforced."""

    student: str
    sprint: str
    planned: frozenset[str]


class PlanBook:
    def __init__(self, catalog: CourseCatalog):
        self.catalog = catalog
        self.plans: dict[tuple[str, str], SprintPlan] = {}

    def record(self, plan: SprintPlan) -> None:
        unknown = {a for a in plan.planned if a not in self.catalog}
        if unknown:
            raise ScheduleError(f"plan references unknown achievements: {sorted(unknown)}")
        self.plans[(plan.student, plan.sprint)] = plan


@dataclass(frozen=True)
class IdealLine:
    start: int
    end: int
    total: float

    def points(self) -> tuple[tuple[int, float], tuple[int, float]]:
        return ((self.start, self.total), (self.end, 0.0))

    def value(self, t: int) -> float:
        if t <= self.start:
            return self.total
        if t >= self.end:
            return 0.0
        return self.total * (self.end - t) / (self.end - self.start)


@dataclass(frozen=True)
class BurndownSeries:
    target: str
    points: tuple[tuple[int, int], ...]
    ideal: IdealLine


def ideal_burndown(schedule: CourseSchedule, total: int) -> IdealLine:
    if total < 0:
        raise ValueError("total must be >= 0")
    return IdealLine(schedule.course_start, schedule.course_end, float(total))


def _passed_timeline(events: Iterable[Event], student: str) -> list[tuple[int, set[str]]]:
    """(ts, passed-set snapshot) after each event that changed the set."""
    passed: set[str] = set()
    snapshots: list[tuple[int, set[str]]] = []
    for event in events:
        if not isinstance(event, OutcomeEvent) or event.student != student:
            continue
        if event.verdict in (PASS, CORRECTION_PASS):
            if event.achievement in passed:
                continue
            passed.add(event.achievement)
        elif event.verdict == CORRECTION_REVOKE:
            if event.achievement not in passed:
                continue
            passed.discard(event.achievement)
        else:
            continue
        snapshots.append((event.ts, set(passed)))
    return snapshots


def actual_burndown(
    events: Sequence[Event],
    student: str,
    target: str,
    catalog: CourseCatalog,
    schedule: CourseSchedule,
) -> BurndownSeries:
    """Remaining achievements toward ``target`` after each grade entry.

    The x axis is grade-entry time (an outcome exists only once graded), so
    the series steps down on passes; manual revocations are the one
    documented way it can step back up.
    """
    total = len(remaining_for_grade((), catalog, target))
    points: list[tuple[int, int]] = [(schedule.course_start, total)]
    last = total
    for ts, passed in _passed_timeline(events, student):
        remaining = len(remaining_for_grade(passed, catalog, target))
        if remaining != last:
            points.append((ts, remaining))
            last = remaining
    return BurndownSeries(
        target=target, points=tuple(points), ideal=ideal_burndown(schedule, total)
    )


def cohort_burnup(events: Sequence[Event], catalog: CourseCatalog) -> dict[str, list[tuple[int, int]]]:
    """Cumulative distinct passes over time, one series per student."""
    students = sorted({e.student for e in events if isinstance(e, OutcomeEvent)})
    chart: dict[str, list[tuple[int, int]]] = {}
    for student in students:
        series: list[tuple[int, int]] = []
        for ts, passed in _passed_timeline(events, student):
            series.append((ts, len(passed)))
        chart[student] = series
    return chart


@dataclass(frozen=True)
class Derailment:
    student: str
    achievement: str
    hard_deadline: int


def derailment_check(
    events: Sequence[Event], schedule: CourseSchedule, now: int
) -> list[Derailment]:
    """Students past a hard deadline without the sprint's assignment passed.

    A flag means a planning meeting is due; nothing is deducted anywhere.
    Students are those present in the log.
    """
    records = replay(events)
    flags: list[Derailment] = []
    for sprint in schedule.sprints():
        deadline = schedule.hard_deadline(sprint)
        if deadline >= now:
            continue
        for achievement_id in sprint.assignments:
            for student, record in sorted(records.items()):
                if achievement_id not in record.passed:
                    flags.append(Derailment(student, achievement_id, deadline))
    return flags


# --- export & file format ---------------------------------------------------

def export_points(series: Sequence[tuple[str, Sequence[tuple[int, float]]]]) -> str:
    """Tabular export for external plotting: series id, timestamp, value."""
    lines = ["series\ttimestamp_ms\tvalue"]
    for series_id, points in series:
        for ts, value in points:
            rendered = f"{value:g}" if isinstance(value, float) else str(value)
            lines.append(f"{series_id}\t{ts}\t{rendered}")
    return "\n".join(lines) + "\n"


def schedule_to_dict(schedule: CourseSchedule) -> dict:
    return {
        "phases": [
            {
                "id": phase.id,
                "name": phase.name,
                "sprints": [
                    {
                        "id": s.id,
                        "start": s.start,
                        "end": s.end,
                        "assignments": list(s.assignments),
                    }
                    for s in phase.sprints
                ],
            }
            for phase in schedule.phases
        ]
    }


def schedule_from_dict(doc: dict) -> CourseSchedule:
    try:
        return CourseSchedule(
            phases=tuple(
                Phase(
                    id=p["id"],
                    name=p.get("name", p["id"]),
                    sprints=tuple(
                        Sprint(
                            id=s["id"],
                            start=int(s["start"]),
                            end=int(s["end"]),
                            assignments=tuple(s.get("assignments", ())),
                        )
                        for s in p["sprints"]
                    ),
                )
                for p in doc["phases"]
            )
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScheduleError(f"malformed schedule document: {exc}") from exc


def load_schedule(path: str | Path) -> CourseSchedule:
    with open(path, encoding="utf-8") as handle:
        return schedule_from_dict(json.load(handle))


def dump_schedule(schedule: CourseSchedule, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(schedule_to_dict(schedule), handle, indent=2, ensure_ascii=False)
        handle.write("\n")
