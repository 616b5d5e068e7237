"""Live demonstration queue: sessions, requests, claims, grading, locks.

All state transitions are expressed as ledger events, so the queue never
holds truth of its own: replaying the ledger reproduces it exactly. The
engine validates business rules (budgets, caps, push-back locks, re-check
injection) before appending anything.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .catalog import CourseCatalog, Kind
from .ledger import (
    CANCELLED,
    CLAIMED,
    CLAIMED_STATE,
    COMPLETED,
    FAIL,
    Ledger,
    LifecycleEvent,
    NOTIFIED,
    OutcomeEvent,
    PASS,
    PENDING,
    PITCH_REJECTED,
    PUSHBACK,
    RECHECK_FAIL,
    RECHECK_PASS,
    RequestState,
    SESSION_CLOSED,
    SESSION_OPENED,
    SUBMITTED,
    SessionState,
)


@dataclass(frozen=True)
class QueuePolicy:
    """Resource limits shaping student behaviour.

    The attempt budget counts completed (graded) requests per student over
    the whole course; cancelled or never-claimed requests cost nothing.
    """

    per_attempt_cap: int = 4
    attempt_budget: int = 30
    per_session_attempt_cap: int = 2
    recheck_enable_threshold: int = 2  # passed assignment-kind achievements
    recheck_probability: float = 1.0

    def __post_init__(self):
        if self.per_attempt_cap < 1 or self.attempt_budget < 1 or self.per_session_attempt_cap < 1:
            raise ValueError("caps and budgets must be >= 1")
        if self.recheck_enable_threshold < 0:
            raise ValueError("recheck_enable_threshold must be >= 0")
        if not 0.0 <= self.recheck_probability <= 1.0:
            raise ValueError("recheck_probability must be in [0, 1]")


class QueueError(Exception):
    """Business-rule violation; ``code`` is the stable machine-readable name."""

    code = "QueueError"

    def __init__(self, message: str):
        super().__init__(message)


class SessionClosedError(QueueError):
    code = "SessionClosed"


class SessionOverlapError(QueueError):
    code = "SessionOverlap"


class SessionNotOpenError(QueueError):
    code = "SessionNotOpen"


class AlreadyPendingError(QueueError):
    code = "AlreadyPending"


class TooManyAchievementsError(QueueError):
    code = "TooManyAchievements"


class PushBackLockedError(QueueError):
    code = "PushBackLocked"


class BudgetExhaustedError(QueueError):
    code = "BudgetExhausted"


class AlreadyPassedError(QueueError):
    code = "AlreadyPassed"


class UnknownAchievementQueueError(QueueError):
    code = "UnknownAchievement"


class PairSizeInvalidError(QueueError):
    code = "PairSizeInvalid"


class UnknownRequestError(QueueError):
    code = "UnknownRequest"


class AlreadyClaimedError(QueueError):
    code = "AlreadyClaimed"


class InvalidStateError(QueueError):
    code = "InvalidState"


class NotSessionExaminerError(QueueError):
    code = "NotSessionExaminer"


class NotParticipantError(QueueError):
    code = "NotParticipant"


class SheetMismatchError(QueueError):
    code = "SheetMismatch"


class InvalidVerdictError(QueueError):
    code = "InvalidVerdict"


@dataclass(frozen=True)
class FeedEntry:
    request: str
    students: tuple[str, ...]
    requested: tuple[str, ...]
    rechecks: Mapping[str, tuple[str, ...]]
    submitted_at: int
    wait_ms: int
    position: int


def draw_recheck(rng: random.Random, passed: set[str]) -> str:
    """Pick one previously passed achievement for re-examination, uniformly."""
    return rng.choice(sorted(passed))


SHEET_VERDICTS = (PASS, FAIL, PUSHBACK)


class DemonstrationQueue:
    """The in-lab request flow, backed entirely by the ledger."""

    def __init__(
        self,
        ledger: Ledger,
        catalog: CourseCatalog,
        policy: QueuePolicy | None = None,
        rng: random.Random | None = None,
    ):
        self.ledger = ledger
        self.catalog = catalog
        self.policy = policy or QueuePolicy()
        self.rng = rng or random.Random()

    @property
    def state(self):
        return self.ledger.state

    # -- sessions ----------------------------------------------------------

    def open_session(
        self,
        session_id: str,
        opens_at: int,
        closes_at: int,
        examiners: Sequence[str],
        now: int,
    ) -> SessionState:
        state = self.state
        if state.open_session_id is not None:
            raise SessionOverlapError(
                f"session {state.open_session_id!r} is already open (single-room model)"
            )
        if session_id in state.sessions:
            raise SessionOverlapError(f"session id {session_id!r} was already used")
        if opens_at >= closes_at:
            raise SessionNotOpenError("session must open strictly before it closes")
        self.ledger.append(
            LifecycleEvent(
                seq=self.ledger.next_seq,
                ts=now,
                kind=SESSION_OPENED,
                session=session_id,
                opens=opens_at,
                closes=closes_at,
                examiners=tuple(examiners),
            )
        )
        return state.sessions[session_id]

    def close_session(self, now: int) -> int:
        """Close the open session, cancelling its pending requests.

        Returns the number of requests cancelled. Push-back locks scoped to
        the session die with it.
        """
        state = self.state
        session = state.open_session()
        if session is None:
            raise SessionNotOpenError("no session is open")
        cancelled = 0
        for request in state.pending_requests():
            if request.session != session.id:
                continue
            self.ledger.append(
                LifecycleEvent(
                    seq=self.ledger.next_seq, ts=now, kind=CANCELLED, request=request.id
                )
            )
            cancelled += 1
        self.ledger.append(
            LifecycleEvent(
                seq=self.ledger.next_seq, ts=now, kind=SESSION_CLOSED, session=session.id
            )
        )
        return cancelled

    # -- submission ----------------------------------------------------------

    def submit_request(
        self, students: Sequence[str], achievements: Sequence[str], now: int
    ) -> RequestState:
        """Validate and enqueue a demonstration request.

        Re-check handling per student: outstanding re-checks are attached
        mandatorily, oldest first, and displace requested achievements when
        the per-attempt cap would be exceeded; otherwise an eligible student
        gets one fresh re-check drawn uniformly from their passed set, which
        must fit under the cap alongside the full request.
        """
        state = self.state
        policy = self.policy

        students = tuple(students)
        if not 1 <= len(students) <= 2 or len(set(students)) != len(students):
            raise PairSizeInvalidError("a request lists one or two distinct students")

        session = state.open_session()
        if session is None:
            raise SessionClosedError("no lab session is open")

        requested: list[str] = []
        for achievement_id in achievements:
            if achievement_id not in self.catalog:
                raise UnknownAchievementQueueError(f"unknown achievement {achievement_id!r}")
            if achievement_id not in requested:
                requested.append(achievement_id)
        if not requested:
            raise TooManyAchievementsError("a request must pitch at least one achievement")

        for student in students:
            if state.pending_request_of(student) is not None:
                raise AlreadyPendingError(f"{student} already has an open request")

        for student in students:
            record = state.students.get(student)
            used = record.attempts_used if record else 0
            if used >= policy.attempt_budget:
                raise BudgetExhaustedError(f"{student} has used all {policy.attempt_budget} attempts")
            in_session = state.session_attempts.get((student, session.id), 0)
            if in_session >= policy.per_session_attempt_cap:
                raise BudgetExhaustedError(
                    f"{student} reached the per-session cap of {policy.per_session_attempt_cap}"
                )

        for achievement_id in requested:
            if all(
                achievement_id in state.students.get(s, _EMPTY_RECORD).passed for s in students
            ):
                raise AlreadyPassedError(f"{achievement_id!r} is already passed")

        for student in students:
            record = state.students.get(student)
            if record is None:
                continue
            for achievement_id in requested:
                if (achievement_id, session.id) in record.pushback_locks:
                    raise PushBackLockedError(
                        f"{achievement_id!r} is push-back locked for {student} this session"
                    )

        rechecks: dict[str, tuple[str, ...]] = {}
        displaced = False
        for student in students:
            record = state.students.get(student)
            if record is None:
                continue
            if record.pending_rechecks:
                attach = tuple(record.pending_rechecks[: policy.per_attempt_cap])
                rechecks[student] = attach
                displaced = True
            elif self._recheck_eligible(record) and record.passed:
                if self.rng.random() < policy.recheck_probability:
                    rechecks[student] = (draw_recheck(self.rng, record.passed),)

        max_attached = max((len(a) for a in rechecks.values()), default=0)
        allowed_new = policy.per_attempt_cap - max_attached
        if len(requested) > allowed_new:
            if displaced:
                requested = requested[: max(allowed_new, 0)]
            else:
                raise TooManyAchievementsError(
                    f"at most {allowed_new} new achievements fit beside the attached re-check"
                    if max_attached
                    else f"at most {policy.per_attempt_cap} achievements per request"
                )

        request_id = f"r{len(state.requests) + 1:06d}"
        self.ledger.append(
            LifecycleEvent(
                seq=self.ledger.next_seq,
                ts=now,
                kind=SUBMITTED,
                request=request_id,
                session=session.id,
                students=students,
                requested=tuple(requested),
                rechecks=rechecks,
            )
        )
        return state.requests[request_id]

    def _recheck_eligible(self, record) -> bool:
        assignment_passes = sum(
            1
            for achievement_id in record.passed
            if achievement_id in self.catalog
            and self.catalog.get(achievement_id).kind is Kind.ASSIGNMENT
        )
        return assignment_passes >= self.policy.recheck_enable_threshold

    def cancel_request(self, request_id: str, now: int, student: str | None = None) -> None:
        request = self._request(request_id)
        if student is not None and student not in request.students:
            raise NotParticipantError(f"{student} is not part of request {request_id}")
        if request.state != PENDING:
            raise InvalidStateError(f"request is {request.state}, only pending requests cancel")
        self.ledger.append(
            LifecycleEvent(seq=self.ledger.next_seq, ts=now, kind=CANCELLED, request=request_id)
        )

    # -- examiner side -------------------------------------------------------

    def feed(self, now: int) -> list[FeedEntry]:
        entries = []
        for position, request in enumerate(self.state.pending_requests()):
            entries.append(
                FeedEntry(
                    request=request.id,
                    students=request.students,
                    requested=request.requested,
                    rechecks=dict(request.rechecks),
                    submitted_at=request.submitted_at,
                    wait_ms=max(0, now - request.submitted_at),
                    position=position,
                )
            )
        return entries

    def claim(self, request_id: str, examiner: str, now: int) -> RequestState:
        request = self._request(request_id)
        if request.state == CLAIMED_STATE and request.claimed_by == examiner:
            return request  # idempotent re-claim
        if request.state != PENDING:
            if request.state == CLAIMED_STATE:
                raise AlreadyClaimedError(f"request already claimed by {request.claimed_by}")
            raise InvalidStateError(f"request is {request.state}")
        session = self.state.sessions[request.session]
        if examiner not in session.examiners:
            raise NotSessionExaminerError(f"{examiner} is not an examiner of session {session.id}")
        self.ledger.append(
            LifecycleEvent(
                seq=self.ledger.next_seq, ts=now, kind=CLAIMED, request=request_id, examiner=examiner
            )
        )
        self.ledger.append(
            LifecycleEvent(
                seq=self.ledger.next_seq,
                ts=now,
                kind=NOTIFIED,
                request=request_id,
                examiner=examiner,
                students=request.students,
            )
        )
        return request

    def note_pitch_rejection(self, request_id: str, examiner: str, now: int, note: str | None = None) -> None:
        """Record that the pitch was rejected; informational, no state change."""
        self._request(request_id)
        self.ledger.append(
            LifecycleEvent(
                seq=self.ledger.next_seq,
                ts=now,
                kind=PITCH_REJECTED,
                request=request_id,
                examiner=examiner,
                note=note,
            )
        )

    def record_results(
        self, request_id: str, sheet: Mapping[str, Mapping[str, str]], now: int
    ) -> list[OutcomeEvent]:
        """Grade a claimed request from a per-student sheet and complete it.

        The sheet must cover exactly the stated achievements of each student
        (requested plus attached re-checks) and nothing else; otherwise the
        whole sheet is rejected. Push-back on a re-check records a plain
        re-check failure without a session lock.
        """
        request = self._request(request_id)
        if request.state != CLAIMED_STATE:
            raise InvalidStateError(f"request is {request.state}, results need a claimed request")

        expected: dict[str, list[str]] = {}
        for student in request.students:
            stated = list(request.requested)
            for achievement_id in request.rechecks.get(student, ()):
                if achievement_id not in stated:
                    stated.append(achievement_id)
            expected[student] = stated

        if set(sheet) != set(request.students):
            raise SheetMismatchError("sheet must grade exactly the students on the request")
        for student, verdicts in sheet.items():
            if set(verdicts) != set(expected[student]):
                raise SheetMismatchError(
                    f"sheet for {student} must cover exactly the stated achievements"
                )
            for achievement_id, verdict in verdicts.items():
                if verdict not in SHEET_VERDICTS:
                    raise InvalidVerdictError(f"verdict {verdict!r} is not pass/fail/pushback")

        # A revoked pass would invalidate the attached re-check; refuse before
        # appending anything so the batch stays atomic.
        for student in request.students:
            record = self.state.students.get(student)
            passed = record.passed if record else set()
            for achievement_id in request.rechecks.get(student, ()):
                if achievement_id not in passed:
                    raise InvalidStateError(
                        f"re-check achievement {achievement_id!r} no longer passed by {student}"
                    )

        events: list[OutcomeEvent] = []
        for student in request.students:
            recheck_set = set(request.rechecks.get(student, ()))
            for achievement_id in expected[student]:
                verdict = sheet[student][achievement_id]
                if achievement_id in recheck_set:
                    verdict = RECHECK_PASS if verdict == PASS else RECHECK_FAIL
                event = OutcomeEvent(
                    seq=self.ledger.next_seq,
                    ts=now,
                    student=student,
                    achievement=achievement_id,
                    verdict=verdict,
                    request=request_id,
                    examiner=request.claimed_by,
                )
                self.ledger.append(event)
                events.append(event)
        self.ledger.append(
            LifecycleEvent(seq=self.ledger.next_seq, ts=now, kind=COMPLETED, request=request_id)
        )
        return events

    # -- queries ---------------------------------------------------------------

    def queue_position(self, request_id: str) -> int:
        request = self._request(request_id)
        if request.state != PENDING:
            raise InvalidStateError(f"request is {request.state}, position applies to pending only")
        ahead = 0
        for other in self.state.pending_requests():
            if other.id == request_id:
                break
            ahead += 1
        return ahead

    def _request(self, request_id: str) -> RequestState:
        request = self.state.requests.get(request_id)
        if request is None:
            raise UnknownRequestError(f"unknown request {request_id!r}")
        return request


class _EmptyRecord:
    passed: frozenset = frozenset()
    pushback_locks: frozenset = frozenset()
    pending_rechecks: tuple = ()
    attempts_used = 0


_EMPTY_RECORD = _EmptyRecord()
