"""Achievement catalog and grade arithmetic.

The catalog is the static description of a course: achievements grouped by
topic and stratified into ordered grade levels. All grade computations live
here as pure functions; a grade is earned by passing every achievement at
that level and below, with no substitution between levels.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable


class Kind(str, Enum):
    REGULAR = "regular"
    ASSIGNMENT = "assignment"
    PROJECT = "project"
    CODING_EXAM = "coding-exam"


class Context(str, Enum):
    LAB = "lab-demonstrable"
    EXTERNAL = "externally-graded"


class CatalogError(Exception):
    """Catalog is structurally unusable for the requested computation."""


class UnknownAchievementError(CatalogError):
    def __init__(self, achievement_id: str):
        super().__init__(f"unknown achievement id: {achievement_id!r}")
        self.achievement_id = achievement_id


class UnknownLevelError(CatalogError):
    def __init__(self, level: str):
        super().__init__(f"unknown grade level: {level!r}")
        self.level = level


@dataclass(frozen=True)
class Achievement:
    id: str
    name: str
    group: str
    level: str
    kind: Kind = Kind.REGULAR
    context: Context = Context.LAB


@dataclass(frozen=True)
class AchievementGroup:
    id: str
    name: str


@dataclass(frozen=True)
class Finding:
    """One violated catalog invariant."""

    code: str
    subject: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def lines(self) -> list[str]:
        return [f"{f.code}\t{f.subject}\t{f.message}" for f in self.findings]


@dataclass(frozen=True)
class CourseCatalog:
    """Immutable course catalog.

    ``levels`` is the ascending list of grade labels; only their order is
    ever used, never any arithmetic on the labels themselves.
    """

    achievements: tuple[Achievement, ...]
    groups: tuple[AchievementGroup, ...]
    levels: tuple[str, ...] = ("3", "4", "5")
    credits_total: float = 20.0
    partial_credit_fraction: float = 0.25
    partial_assignment_threshold: float = 0.5
    partial_achievement_threshold: float = 0.5
    _by_id: dict[str, Achievement] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self):
        if not self.levels:
            raise CatalogError("catalog must define at least one grade level")
        index = {}
        for ach in self.achievements:
            index.setdefault(ach.id, ach)
        object.__setattr__(self, "_by_id", index)

    def get(self, achievement_id: str) -> Achievement:
        try:
            return self._by_id[achievement_id]
        except KeyError:
            raise UnknownAchievementError(achievement_id) from None

    def __contains__(self, achievement_id: str) -> bool:
        return achievement_id in self._by_id

    def ids(self) -> set[str]:
        return set(self._by_id)

    def level_index(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise UnknownLevelError(level) from None

    def lowest_level(self) -> str:
        return self.levels[0]

    def at_or_below(self, level: str) -> list[Achievement]:
        cutoff = self.level_index(level)
        return [
            a
            for a in self.achievements
            if a.level in self.levels and self.levels.index(a.level) <= cutoff
        ]


def validate_catalog(catalog: CourseCatalog) -> ValidationReport:
    """Check every catalog invariant and report all violations found.

    An empty report means the catalog is well-formed.
    """
    findings: list[Finding] = []
    seen_ids: set[str] = set()
    group_ids = {g.id for g in catalog.groups}

    for ach in catalog.achievements:
        if ach.id in seen_ids:
            findings.append(
                Finding("duplicate-id", ach.id, "achievement id appears more than once")
            )
        seen_ids.add(ach.id)
        if ach.group not in group_ids:
            findings.append(
                Finding("dangling-group", ach.id, f"references unknown group {ach.group!r}")
            )
        if ach.level not in catalog.levels:
            findings.append(
                Finding("dangling-level", ach.id, f"references unknown level {ach.level!r}")
            )
        if ach.kind is Kind.CODING_EXAM and ach.context is not Context.EXTERNAL:
            findings.append(
                Finding("coding-exam-context", ach.id, "coding-exam must be externally-graded")
            )

    seen_group_names: set[str] = set()
    seen_group_ids: set[str] = set()
    for group in catalog.groups:
        if group.id in seen_group_ids:
            findings.append(Finding("duplicate-group-id", group.id, "group id appears more than once"))
        seen_group_ids.add(group.id)
        if group.name in seen_group_names:
            findings.append(Finding("duplicate-group-name", group.id, f"group name {group.name!r} reused"))
        seen_group_names.add(group.name)

    lowest = catalog.levels[0]
    if not any(a.level == lowest for a in catalog.achievements):
        findings.append(
            Finding("empty-lowest-level", lowest, "no achievement at the lowest grade level")
        )

    return ValidationReport(tuple(findings))


def compute_grade(passed: Iterable[str], catalog: CourseCatalog) -> str | None:
    """Final grade: the highest level whose full prefix of achievements is passed.

    Returns None when any lowest-level achievement is missing (no grade yet).
    Unknown achievement ids are rejected as corrupt input.
    """
    passed_set = set(passed)
    for achievement_id in passed_set:
        if achievement_id not in catalog:
            raise UnknownAchievementError(achievement_id)

    grade: str | None = None
    for level in catalog.levels:
        required = {a.id for a in catalog.achievements if a.level == level}
        if required <= passed_set:
            grade = level
        else:
            break
    return grade


def remaining_for_grade(
    passed: Iterable[str], catalog: CourseCatalog, target: str
) -> set[str]:
    """Achievement ids at or below ``target`` not yet passed."""
    catalog.level_index(target)
    passed_set = set(passed)
    return {a.id for a in catalog.at_or_below(target)} - passed_set


def attainable_grades(
    passed: Iterable[str],
    remaining_attempts: int,
    per_attempt_cap: int,
    catalog: CourseCatalog,
) -> set[str]:
    """Grades still reachable within the remaining demonstration capacity.

    Only lab-demonstrable achievements consume attempt capacity; externally
    graded ones are treated as always schedulable.
    """
    if remaining_attempts < 0:
        raise ValueError("remaining_attempts must be >= 0")
    if per_attempt_cap < 1:
        raise ValueError("per_attempt_cap must be >= 1")
    passed_set = set(passed)
    capacity = remaining_attempts * per_attempt_cap
    attainable: set[str] = set()
    for level in catalog.levels:
        remaining = remaining_for_grade(passed_set, catalog, level)
        lab_remaining = sum(1 for r in remaining if catalog.get(r).context is Context.LAB)
        if lab_remaining <= capacity:
            attainable.add(level)
    return attainable


def partial_credit(passed: Iterable[str], catalog: CourseCatalog) -> float:
    """Credits earned: full on any grade, one partial tier, or nothing.

    The partial tier requires both enough passed assignments and enough of
    the lowest-grade achievements, with project-kind achievements excluded
    from both ratios. Coding-exam achievements count on the non-assignment
    side.
    """
    passed_set = set(passed)
    for achievement_id in passed_set:
        if achievement_id not in catalog:
            raise UnknownAchievementError(achievement_id)

    if compute_grade(passed_set, catalog) is not None:
        return catalog.credits_total

    assignments = [
        a for a in catalog.achievements if a.kind is Kind.ASSIGNMENT
    ]
    lowest_needed = [
        a
        for a in catalog.at_or_below(catalog.lowest_level())
        if a.kind is not Kind.PROJECT
    ]

    def ratio_met(pool: list[Achievement], threshold: float) -> bool:
        if not pool:
            return True
        done = sum(1 for a in pool if a.id in passed_set)
        return done / len(pool) >= threshold

    if ratio_met(assignments, catalog.partial_assignment_threshold) and ratio_met(
        lowest_needed, catalog.partial_achievement_threshold
    ):
        return catalog.partial_credit_fraction * catalog.credits_total
    return 0.0


# --- catalog file format -------------------------------------------------
#
# One JSON document: ordered achievement records plus groups, levels and the
# credit configuration. Round-trips losslessly through load/dump.

def catalog_to_dict(catalog: CourseCatalog) -> dict:
    return {
        "levels": list(catalog.levels),
        "credits_total": catalog.credits_total,
        "partial_credit_fraction": catalog.partial_credit_fraction,
        "partial_assignment_threshold": catalog.partial_assignment_threshold,
        "partial_achievement_threshold": catalog.partial_achievement_threshold,
        "groups": [{"id": g.id, "name": g.name} for g in catalog.groups],
        "achievements": [
            {
                "id": a.id,
                "name": a.name,
                "group": a.group,
                "level": a.level,
                "kind": a.kind.value,
                "context": a.context.value,
            }
            for a in catalog.achievements
        ],
    }


def catalog_from_dict(doc: dict) -> CourseCatalog:
    try:
        achievements = tuple(
            Achievement(
                id=rec["id"],
                name=rec["name"],
                group=rec["group"],
                level=rec["level"],
                kind=Kind(rec.get("kind", "regular")),
                context=Context(rec.get("context", "lab-demonstrable")),
            )
            for rec in doc["achievements"]
        )
        groups = tuple(
            AchievementGroup(id=rec["id"], name=rec["name"]) for rec in doc["groups"]
        )
        return CourseCatalog(
            achievements=achievements,
            groups=groups,
            levels=tuple(doc.get("levels", ("3", "4", "5"))),
            credits_total=float(doc.get("credits_total", 20.0)),
            partial_credit_fraction=float(doc.get("partial_credit_fraction", 0.25)),
            partial_assignment_threshold=float(doc.get("partial_assignment_threshold", 0.5)),
            partial_achievement_threshold=float(doc.get("partial_achievement_threshold", 0.5)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"malformed catalog document: {exc}") from exc


def load_catalog(path: str | Path) -> CourseCatalog:
    with open(path, encoding="utf-8") as handle:
        return catalog_from_dict(json.load(handle))


def dump_catalog(catalog: CourseCatalog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(catalog_to_dict(catalog), handle, indent=2, ensure_ascii=False)
        handle.write("\n")
