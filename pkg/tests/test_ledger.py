import random

import pytest

from masteryops.ledger import (
    CORRECTION_PASS,
    CORRECTION_REVOKE,
    CorruptEventError,
    FAIL,
    Ledger,
    LifecycleEvent,
    OutOfOrderError,
    OutcomeEvent,
    PASS,
    PUSHBACK,
    RECHECK_FAIL,
    RECHECK_PASS,
    SESSION_CLOSED,
    SESSION_OPENED,
    SUBMITTED,
    TruncatedLedgerError,
    apply_correction,
    canonical_state,
    event_from_line,
    event_to_line,
    load_events,
    replay,
    replay_state,
    save_events,
)


def outcome(seq, student, achievement, verdict, ts=None, request=None, note=None):
    return OutcomeEvent(
        seq=seq,
        ts=ts if ts is not None else seq * 1000,
        student=student,
        achievement=achievement,
        verdict=verdict,
        request=request,
        note=note,
    )


def test_empty_log_empty_map():
    assert replay([]) == {}


def test_pass_lands_in_passed():
    records = replay([outcome(1, "stu", "x", PASS)])
    assert records["stu"].passed == {"x"}


def test_recheck_fail_keeps_pass_and_queues():
    events = [
        outcome(1, "stu", "x", PASS),
        outcome(2, "stu", "x", RECHECK_FAIL),
    ]
    record = replay(events)["stu"]
    assert "x" in record.passed
    assert record.pending_rechecks == ["x"]


def test_recheck_cycle_clears_queue():
    # pass X; recheck-fail X; recheck-pass X
    events = [
        outcome(1, "stu", "x", PASS),
        outcome(2, "stu", "x", RECHECK_FAIL),
        outcome(3, "stu", "x", RECHECK_PASS),
    ]
    record = replay(events)["stu"]
    assert record.passed == {"x"}
    assert record.pending_rechecks == []


def test_recheck_queue_keeps_failure_order():
    events = [
        outcome(1, "stu", "x", PASS),
        outcome(2, "stu", "y", PASS),
        outcome(3, "stu", "x", RECHECK_FAIL),
        outcome(4, "stu", "y", RECHECK_FAIL),
        outcome(5, "stu", "x", RECHECK_FAIL),  # repeat fail must not reorder
    ]
    assert replay(events)["stu"].pending_rechecks == ["x", "y"]


def test_pass_permanence_under_recheck_storm():
    rng = random.Random(3)
    events = [outcome(i + 1, "stu", f"a{i}", PASS) for i in range(5)]
    seq = len(events)
    for _ in range(100):
        seq += 1
        target = f"a{rng.randrange(5)}"
        events.append(outcome(seq, "stu", target, rng.choice([RECHECK_FAIL, RECHECK_PASS])))
    record = replay(events)["stu"]
    assert record.passed == {f"a{i}" for i in range(5)}


def test_recheck_on_never_passed_rejected():
    with pytest.raises(CorruptEventError) as err:
        replay([outcome(1, "stu", "x", RECHECK_FAIL)])
    assert err.value.seq == 1


def test_correction_revoke_removes():
    events = [
        outcome(1, "stu", "x", PASS),
        outcome(2, "stu", "x", CORRECTION_REVOKE, note="entered for wrong student"),
    ]
    assert replay(events)["stu"].passed == set()


def test_correction_needs_note():
    with pytest.raises(CorruptEventError):
        replay([outcome(1, "stu", "x", CORRECTION_PASS, note="  ")])


def test_revoke_never_passed_rejected():
    with pytest.raises(CorruptEventError):
        replay([outcome(1, "stu", "x", CORRECTION_REVOKE, note="oops")])


def test_apply_correction_roundtrip():
    ledger = Ledger()
    apply_correction(ledger, "stu", "x", "pass", "demo missed by system", now=10)
    assert ledger.state.students["stu"].passed == {"x"}
    apply_correction(ledger, "stu", "x", "revoke", "was a mistake", now=20)
    apply_correction(ledger, "stu", "x", "pass", "no, it was right", now=30)
    assert ledger.state.students["stu"].passed == {"x"}


def test_apply_correction_empty_note():
    with pytest.raises(ValueError):
        apply_correction(Ledger(), "stu", "x", "pass", "  ", now=10)


def test_out_of_order_seq_rejected():
    ledger = Ledger()
    ledger.append(outcome(1, "stu", "x", PASS))
    with pytest.raises(OutOfOrderError):
        ledger.append(outcome(3, "stu", "y", PASS))


def test_failures_counted_for_analytics():
    events = [
        outcome(1, "stu", "x", FAIL),
        outcome(2, "stu", "x", FAIL),
        outcome(3, "stu", "x", PASS),
    ]
    record = replay(events)["stu"]
    assert record.failures["x"] == 2
    assert record.passed == {"x"}


# --- lifecycle ----------------------------------------------------------------

def session_events(start_seq=1):
    return [
        LifecycleEvent(
            seq=start_seq,
            ts=0,
            kind=SESSION_OPENED,
            session="s1",
            opens=0,
            closes=4 * 3_600_000,
            examiners=("tutor",),
        )
    ]


def test_pushback_lock_scoped_to_session_and_cleared():
    events = session_events()
    events.append(
        LifecycleEvent(
            seq=2, ts=10, kind=SUBMITTED, request="r1", session="s1",
            students=("stu",), requested=("x",), rechecks={},
        )
    )
    events.append(LifecycleEvent(seq=3, ts=20, kind="claimed", request="r1", examiner="tutor"))
    events.append(outcome(4, "stu", "x", PUSHBACK, ts=30, request="r1"))
    events.append(LifecycleEvent(seq=5, ts=40, kind="completed", request="r1"))
    state = replay_state(events)
    assert state.students["stu"].pushback_locks == {("x", "s1")}
    assert state.students["stu"].attempts_used == 1

    events.append(LifecycleEvent(seq=6, ts=50, kind=SESSION_CLOSED, session="s1"))
    state = replay_state(events)
    assert state.students["stu"].pushback_locks == set()


def test_session_close_with_pending_request_is_corrupt():
    events = session_events()
    events.append(
        LifecycleEvent(
            seq=2, ts=10, kind=SUBMITTED, request="r1", session="s1",
            students=("stu",), requested=("x",), rechecks={},
        )
    )
    events.append(LifecycleEvent(seq=3, ts=20, kind=SESSION_CLOSED, session="s1"))
    with pytest.raises(CorruptEventError) as err:
        replay_state(events)
    assert err.value.seq == 3


def test_two_students_interleaved_are_independent():
    """Commuting events: interleaving order between students is irrelevant."""
    a_events = [("a", f"ach{i}", PASS) for i in range(4)]
    b_events = [("b", f"ach{i}", PASS) for i in range(4)] + [("b", "ach0", RECHECK_FAIL)]

    def interleave(order_seed):
        rng = random.Random(order_seed)
        merged = []
        ai, bi = 0, 0
        while ai < len(a_events) or bi < len(b_events):
            take_a = ai < len(a_events) and (bi >= len(b_events) or rng.random() < 0.5)
            student, ach, verdict = (a_events[ai] if take_a else b_events[bi])
            if take_a:
                ai += 1
            else:
                bi += 1
            merged.append(outcome(len(merged) + 1, student, ach, verdict))
        return replay(merged)

    baselines = interleave(0)
    for seed in range(1, 6):
        other = interleave(seed)
        for student in ("a", "b"):
            assert other[student].passed == baselines[student].passed
            assert other[student].pending_rechecks == baselines[student].pending_rechecks


def test_incremental_replay_equals_full():
    events = session_events()
    events += [
        LifecycleEvent(
            seq=2, ts=10, kind=SUBMITTED, request="r1", session="s1",
            students=("a", "b"), requested=("x", "y"), rechecks={},
        ),
        LifecycleEvent(seq=3, ts=20, kind="claimed", request="r1", examiner="tutor"),
        outcome(4, "a", "x", PASS, ts=30, request="r1"),
        outcome(5, "b", "x", FAIL, ts=30, request="r1"),
        LifecycleEvent(seq=6, ts=40, kind="completed", request="r1"),
    ]
    full = replay_state(events)
    partial = replay_state(events[:3])
    for event in events[3:]:
        partial.apply(event)
    assert canonical_state(partial) == canonical_state(full)


# --- persistence ------------------------------------------------------------------

def sample_events():
    events = session_events()
    events += [
        LifecycleEvent(
            seq=2, ts=10, kind=SUBMITTED, request="r1", session="s1",
            students=("a",), requested=("x",), rechecks={},
        ),
        LifecycleEvent(seq=3, ts=20, kind="claimed", request="r1", examiner="tutor"),
        outcome(4, "a", "x", PASS, ts=25, request="r1"),
        LifecycleEvent(seq=5, ts=30, kind="completed", request="r1"),
        outcome(6, "a", "x", RECHECK_FAIL, ts=40),
        LifecycleEvent(seq=7, ts=50, kind=SESSION_CLOSED, session="s1"),
    ]
    return events


def test_save_load_roundtrip(tmp_path):
    path = tmp_path / "ledger.ndjson"
    events = sample_events()
    save_events(events, path)
    assert load_events(path) == events
    assert canonical_state(replay_state(load_events(path))) == canonical_state(
        replay_state(events)
    )


def test_line_roundtrip_all_types():
    for event in sample_events():
        line = event_to_line(event)
        assert event_from_line(line, event.seq) == event


def test_truncated_tail_rejected(tmp_path):
    path = tmp_path / "ledger.ndjson"
    save_events(sample_events(), path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-10])  # tear the final line
    with pytest.raises(TruncatedLedgerError) as err:
        load_events(path)
    assert err.value.seq == 7


def test_garbage_line_rejected_with_seq(tmp_path):
    path = tmp_path / "ledger.ndjson"
    lines = [event_to_line(e) for e in sample_events()]
    lines[2] = '{"seq": 3, "broken'
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptEventError) as err:
        load_events(path)
    assert err.value.seq == 3


def test_file_backed_append_and_reload(tmp_path):
    path = tmp_path / "ledger.ndjson"
    ledger = Ledger(path=path)
    ledger.append(outcome(1, "stu", "x", PASS))
    ledger.append(outcome(2, "stu", "y", PASS))
    ledger.close()
    again = Ledger.load(path)
    assert canonical_state(again.state) == canonical_state(ledger.state)


def test_replay_deterministic_byte_for_byte():
    events = sample_events()
    assert canonical_state(replay_state(events)) == canonical_state(replay_state(events))
