"""Append-only outcome ledger and deterministic replay.

Every per-student fact in the system is derived by replaying this log: grade
outcomes, re-check backlogs, push-back locks, attempt budgets, and the full
request lifecycle. Entries are never edited; mistakes are fixed by appending
manual-correction events.

On disk the log is newline-delimited JSON, one event per line, UTF-8, with a
fixed field order per event type and strictly ascending seq starting at 1.
A final line without a trailing newline is treated as a torn write and
rejected on load.
"""
from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

# Outcome verdicts
PASS = "pass"
FAIL = "fail"
PUSHBACK = "pushback"
RECHECK_PASS = "recheck-pass"
RECHECK_FAIL = "recheck-fail"
CORRECTION_PASS = "manual-correction-pass"
CORRECTION_REVOKE = "manual-correction-revoke"

VERDICTS = frozenset(
    (PASS, FAIL, PUSHBACK, RECHECK_PASS, RECHECK_FAIL, CORRECTION_PASS, CORRECTION_REVOKE)
)

# Request/session lifecycle kinds
SUBMITTED = "submitted"
CLAIMED = "claimed"
NOTIFIED = "notified"
COMPLETED = "completed"
CANCELLED = "cancelled"
PITCH_REJECTED = "pitch-rejected"
SESSION_OPENED = "session-opened"
SESSION_CLOSED = "session-closed"

LIFECYCLE_KINDS = frozenset(
    (SUBMITTED, CLAIMED, NOTIFIED, COMPLETED, CANCELLED, PITCH_REJECTED, SESSION_OPENED, SESSION_CLOSED)
)

PENDING = "pending"
CLAIMED_STATE = "claimed"
COMPLETED_STATE = "completed"
CANCELLED_STATE = "cancelled"


class LedgerError(Exception):
    """Base for all ledger failures; carries the seq of the offending entry."""

    def __init__(self, seq: int, message: str):
        super().__init__(f"seq {seq}: {message}")
        self.seq = seq


class OutOfOrderError(LedgerError):
    pass


class CorruptEventError(LedgerError):
    pass


class TruncatedLedgerError(LedgerError):
    def __init__(self, seq: int):
        super().__init__(seq, "truncated final line (missing newline); entry rejected")


@dataclass(frozen=True)
class OutcomeEvent:
    seq: int
    ts: int  # UTC epoch milliseconds, supplied by the caller
    student: str
    achievement: str
    verdict: str
    request: str | None = None
    examiner: str | None = None
    note: str | None = None


@dataclass(frozen=True)
class LifecycleEvent:
    seq: int
    ts: int
    kind: str
    request: str | None = None
    session: str | None = None
    students: tuple[str, ...] = ()
    requested: tuple[str, ...] = ()
    rechecks: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    examiner: str | None = None
    opens: int | None = None
    closes: int | None = None
    examiners: tuple[str, ...] = ()
    note: str | None = None


Event = OutcomeEvent | LifecycleEvent


@dataclass
class StudentRecord:
    """Replayed per-student state."""

    student: str
    passed: set[str] = field(default_factory=set)
    pending_rechecks: list[str] = field(default_factory=list)
    pushback_locks: set[tuple[str, str]] = field(default_factory=set)  # (achievement, session)
    attempts_used: int = 0
    failures: Counter = field(default_factory=Counter)


@dataclass
class RequestState:
    id: str
    session: str
    students: tuple[str, ...]
    requested: tuple[str, ...]
    rechecks: dict[str, tuple[str, ...]]
    state: str = PENDING
    claimed_by: str | None = None
    submitted_at: int = 0
    claimed_at: int | None = None
    completed_at: int | None = None
    cancelled_at: int | None = None


@dataclass
class SessionState:
    id: str
    opens_at: int
    closes_at: int
    examiners: tuple[str, ...]
    open: bool = True


class ReplayState:
    """Mutable fold over the event log.

    ``apply`` validates each event against the state replayed so far before
    mutating anything, so a raising apply leaves the state untouched.
    """

    def __init__(self):
        self.students: dict[str, StudentRecord] = {}
        self.requests: dict[str, RequestState] = {}
        self.sessions: dict[str, SessionState] = {}
        self.open_session_id: str | None = None
        self.session_attempts: dict[tuple[str, str], int] = {}
        self.last_seq = 0
        # derived indexes, kept in step with the fold
        self._pending_ids: set[str] = set()
        self._active_by_student: dict[str, str] = {}

    def record(self, student: str) -> StudentRecord:
        if student not in self.students:
            self.students[student] = StudentRecord(student)
        return self.students[student]

    def open_session(self) -> SessionState | None:
        if self.open_session_id is None:
            return None
        return self.sessions[self.open_session_id]

    def pending_requests(self) -> list[RequestState]:
        pending = [self.requests[rid] for rid in self._pending_ids]
        pending.sort(key=lambda r: (r.submitted_at, r.id))
        return pending

    def pending_request_of(self, student: str) -> RequestState | None:
        request_id = self._active_by_student.get(student)
        return self.requests[request_id] if request_id is not None else None

    def apply(self, event: Event) -> None:
        if event.seq != self.last_seq + 1:
            raise OutOfOrderError(event.seq, f"expected seq {self.last_seq + 1}")
        if isinstance(event, OutcomeEvent):
            self._apply_outcome(event)
        else:
            self._apply_lifecycle(event)
        self.last_seq = event.seq

    def _apply_outcome(self, event: OutcomeEvent) -> None:
        if event.verdict not in VERDICTS:
            raise CorruptEventError(event.seq, f"unknown verdict {event.verdict!r}")
        if event.request is not None and event.request not in self.requests:
            raise CorruptEventError(event.seq, f"outcome references unknown request {event.request!r}")
        record = self.students.get(event.student)
        passed = record.passed if record else set()

        if event.verdict in (RECHECK_PASS, RECHECK_FAIL) and event.achievement not in passed:
            raise CorruptEventError(
                event.seq, f"re-check verdict for never-passed achievement {event.achievement!r}"
            )
        if event.verdict in (CORRECTION_PASS, CORRECTION_REVOKE) and not (event.note or "").strip():
            raise CorruptEventError(event.seq, "manual correction requires a non-empty note")
        if event.verdict == CORRECTION_REVOKE and event.achievement not in passed:
            raise CorruptEventError(
                event.seq, f"revoke of never-passed achievement {event.achievement!r}"
            )

        record = self.record(event.student)
        achievement = event.achievement
        if event.verdict == PASS or event.verdict == CORRECTION_PASS:
            record.passed.add(achievement)
        elif event.verdict == FAIL:
            record.failures[achievement] += 1
        elif event.verdict == PUSHBACK:
            record.failures[achievement] += 1
            if event.request is not None:
                session = self.requests[event.request].session
                # a push-back graded after its session closed has nothing
                # left to block; locks never outlive the session
                if session == self.open_session_id:
                    record.pushback_locks.add((achievement, session))
        elif event.verdict == RECHECK_PASS:
            if achievement in record.pending_rechecks:
                record.pending_rechecks.remove(achievement)
        elif event.verdict == RECHECK_FAIL:
            if achievement not in record.pending_rechecks:
                record.pending_rechecks.append(achievement)
        elif event.verdict == CORRECTION_REVOKE:
            record.passed.discard(achievement)
            if achievement in record.pending_rechecks:
                record.pending_rechecks.remove(achievement)

    def _apply_lifecycle(self, event: LifecycleEvent) -> None:
        kind = event.kind
        if kind not in LIFECYCLE_KINDS:
            raise CorruptEventError(event.seq, f"unknown lifecycle kind {kind!r}")

        if kind == SESSION_OPENED:
            if event.session in self.sessions:
                raise CorruptEventError(event.seq, f"session {event.session!r} already exists")
            if self.open_session_id is not None:
                raise CorruptEventError(
                    event.seq, f"session {self.open_session_id!r} still open (single-room model)"
                )
            if event.opens is None or event.closes is None or event.opens >= event.closes:
                raise CorruptEventError(event.seq, "session must open strictly before it closes")
            self.sessions[event.session] = SessionState(
                event.session, event.opens, event.closes, tuple(event.examiners)
            )
            self.open_session_id = event.session

        elif kind == SESSION_CLOSED:
            if event.session != self.open_session_id:
                raise CorruptEventError(event.seq, f"session {event.session!r} is not open")
            leftover = [r.id for r in self.pending_requests() if r.session == event.session]
            if leftover:
                raise CorruptEventError(
                    event.seq, f"session closed with pending requests {leftover}"
                )
            self.sessions[event.session].open = False
            self.open_session_id = None
            for record in self.students.values():
                record.pushback_locks = {
                    lock for lock in record.pushback_locks if lock[1] != event.session
                }

        elif kind == SUBMITTED:
            if event.request in self.requests:
                raise CorruptEventError(event.seq, f"request id {event.request!r} reused")
            if event.session != self.open_session_id:
                raise CorruptEventError(event.seq, "submission outside an open session")
            if not 1 <= len(event.students) <= 2 or len(set(event.students)) != len(event.students):
                raise CorruptEventError(event.seq, "request must list 1 or 2 distinct students")
            if set(event.rechecks) - set(event.students):
                raise CorruptEventError(event.seq, "re-checks attached to non-participating student")
            self.requests[event.request] = RequestState(
                id=event.request,
                session=event.session,
                students=tuple(event.students),
                requested=tuple(event.requested),
                rechecks={s: tuple(a) for s, a in event.rechecks.items()},
                submitted_at=event.ts,
            )
            self._pending_ids.add(event.request)
            for student in event.students:
                self.record(student)
                self._active_by_student[student] = event.request

        else:
            request = self.requests.get(event.request or "")
            if request is None:
                raise CorruptEventError(event.seq, f"unknown request {event.request!r}")
            if kind == CLAIMED:
                if request.state != PENDING:
                    raise CorruptEventError(event.seq, f"claim on {request.state} request")
                request.state = CLAIMED_STATE
                request.claimed_by = event.examiner
                request.claimed_at = event.ts
                self._pending_ids.discard(request.id)
            elif kind == COMPLETED:
                if request.state != CLAIMED_STATE:
                    raise CorruptEventError(event.seq, f"completion of {request.state} request")
                request.state = COMPLETED_STATE
                request.completed_at = event.ts
                for student in request.students:
                    self.record(student).attempts_used += 1
                    key = (student, request.session)
                    self.session_attempts[key] = self.session_attempts.get(key, 0) + 1
                    self._active_by_student.pop(student, None)
            elif kind == CANCELLED:
                if request.state != PENDING:
                    raise CorruptEventError(event.seq, f"cancellation of {request.state} request")
                request.state = CANCELLED_STATE
                request.cancelled_at = event.ts
                self._pending_ids.discard(request.id)
                for student in request.students:
                    self._active_by_student.pop(student, None)
            # NOTIFIED and PITCH_REJECTED are informational


def replay(events: Iterable[Event]) -> dict[str, StudentRecord]:
    """Replay the log into per-student records. Deterministic."""
    return replay_state(events).students


def replay_state(events: Iterable[Event]) -> ReplayState:
    state = ReplayState()
    for event in events:
        state.apply(event)
    return state


def canonical_state(state: ReplayState) -> str:
    """Canonical JSON serialization of replayed state, for equality checks."""
    doc = {
        "students": {
            s: {
                "passed": sorted(r.passed),
                "pending_rechecks": list(r.pending_rechecks),
                "pushback_locks": sorted(map(list, r.pushback_locks)),
                "attempts_used": r.attempts_used,
                "failures": {k: v for k, v in sorted(r.failures.items()) if v},
            }
            for s, r in sorted(state.students.items())
        },
        "requests": {
            rid: {
                "session": r.session,
                "students": list(r.students),
                "requested": list(r.requested),
                "rechecks": {s: list(a) for s, a in sorted(r.rechecks.items())},
                "state": r.state,
                "claimed_by": r.claimed_by,
                "submitted_at": r.submitted_at,
                "claimed_at": r.claimed_at,
                "completed_at": r.completed_at,
                "cancelled_at": r.cancelled_at,
            }
            for rid, r in sorted(state.requests.items())
        },
        "sessions": {
            sid: {
                "opens_at": s.opens_at,
                "closes_at": s.closes_at,
                "examiners": list(s.examiners),
                "open": s.open,
            }
            for sid, s in sorted(state.sessions.items())
        },
        "open_session": state.open_session_id,
        "last_seq": state.last_seq,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# --- wire format ----------------------------------------------------------

_LIFECYCLE_FIELDS = {
    SUBMITTED: ("request", "session", "students", "requested", "rechecks"),
    CLAIMED: ("request", "examiner"),
    NOTIFIED: ("request", "examiner", "students"),
    COMPLETED: ("request",),
    CANCELLED: ("request",),
    PITCH_REJECTED: ("request", "examiner", "note"),
    SESSION_OPENED: ("session", "opens", "closes", "examiners"),
    SESSION_CLOSED: ("session",),
}


def event_to_line(event: Event) -> str:
    if isinstance(event, OutcomeEvent):
        doc = {
            "seq": event.seq,
            "ts": event.ts,
            "type": "outcome",
            "student": event.student,
            "achievement": event.achievement,
            "verdict": event.verdict,
            "request": event.request,
            "examiner": event.examiner,
            "note": event.note,
        }
    else:
        doc = {"seq": event.seq, "ts": event.ts, "type": event.kind}
        for name in _LIFECYCLE_FIELDS[event.kind]:
            value = getattr(event, name)
            if name in ("students", "requested", "examiners"):
                value = list(value)
            elif name == "rechecks":
                value = {s: list(a) for s, a in value.items()}
            doc[name] = value
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def event_from_line(line: str, expected_seq: int) -> Event:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptEventError(expected_seq, f"unparseable entry: {exc}") from exc
    if not isinstance(doc, dict) or "type" not in doc or "seq" not in doc or "ts" not in doc:
        raise CorruptEventError(expected_seq, "entry missing seq/ts/type")
    etype = doc["type"]
    if etype == "outcome":
        expected_keys = {"seq", "ts", "type", "student", "achievement", "verdict", "request", "examiner", "note"}
        if set(doc) != expected_keys:
            raise CorruptEventError(expected_seq, "outcome entry has unexpected field set")
        return OutcomeEvent(
            seq=doc["seq"],
            ts=doc["ts"],
            student=doc["student"],
            achievement=doc["achievement"],
            verdict=doc["verdict"],
            request=doc["request"],
            examiner=doc["examiner"],
            note=doc["note"],
        )
    if etype not in _LIFECYCLE_FIELDS:
        raise CorruptEventError(expected_seq, f"unknown event type {etype!r}")
    expected_keys = {"seq", "ts", "type", *_LIFECYCLE_FIELDS[etype]}
    if set(doc) != expected_keys:
        raise CorruptEventError(expected_seq, f"{etype} entry has unexpected field set")
    kwargs: dict = {}
    for name in _LIFECYCLE_FIELDS[etype]:
        value = doc[name]
        if name in ("students", "requested", "examiners"):
            value = tuple(value)
        elif name == "rechecks":
            value = {s: tuple(a) for s, a in value.items()}
        kwargs[name] = value
    return LifecycleEvent(seq=doc["seq"], ts=doc["ts"], kind=etype, **kwargs)


class Ledger:
    """Event log plus its incrementally maintained replay state.

    Single-writer: callers must serialize append() externally (the service
    funnels all mutations through one lock). Readers may inspect ``state``
    between appends.
    """

    def __init__(self, events: Iterable[Event] = (), path: str | Path | None = None):
        self.records: list[Event] = []
        self.state = ReplayState()
        self._fh = None
        for event in events:
            self.state.apply(event)
            self.records.append(event)
        if path is not None:
            self._open_for_append(path)

    @property
    def next_seq(self) -> int:
        return len(self.records) + 1

    def append(self, event: Event) -> Event:
        """Validate and append one event; durably persisted before returning."""
        self.state.apply(event)
        self.records.append(event)
        if self._fh is not None:
            self._fh.write(event_to_line(event) + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
        return event

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def _open_for_append(self, path: str | Path) -> None:
        self._fh = open(path, "a", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, writable: bool = False) -> "Ledger":
        events = load_events(path)
        return cls(events, path=path if writable else None)


def load_events(path: str | Path) -> list[Event]:
    """Parse a ledger file, rejecting torn tails and out-of-order entries."""
    raw = Path(path).read_bytes()
    events: list[Event] = []
    if not raw:
        return events
    text = raw.decode("utf-8")
    complete = text.endswith("\n")
    lines = text.split("\n")
    if complete:
        lines = lines[:-1]
    body, tail = (lines, None) if complete else (lines[:-1], lines[-1])
    for index, line in enumerate(body):
        expected_seq = index + 1
        event = event_from_line(line, expected_seq)
        if event.seq != expected_seq:
            raise OutOfOrderError(expected_seq, f"entry carries seq {event.seq}")
        events.append(event)
    if tail is not None:
        raise TruncatedLedgerError(len(body) + 1)
    return events


def save_events(events: Iterable[Event], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for event in events:
            handle.write(event_to_line(event) + "\n")


def apply_correction(
    ledger: Ledger,
    student: str,
    achievement: str,
    direction: str,
    note: str,
    now: int,
    examiner: str | None = None,
) -> OutcomeEvent:
    """Append a compensating manual-correction event; history is never edited.

    ``direction`` is "pass" or "revoke". Revoking a never-passed achievement
    or supplying an empty note is rejected.
    """
    if direction not in ("pass", "revoke"):
        raise ValueError(f"direction must be 'pass' or 'revoke', got {direction!r}")
    if not note.strip():
        raise ValueError("manual corrections require a non-empty note")
    verdict = CORRECTION_PASS if direction == "pass" else CORRECTION_REVOKE
    event = OutcomeEvent(
        seq=ledger.next_seq,
        ts=now,
        student=student,
        achievement=achievement,
        verdict=verdict,
        examiner=examiner,
        note=note,
    )
    ledger.append(event)
    return event
