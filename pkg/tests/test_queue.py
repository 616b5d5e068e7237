import random

import pytest

from masteryops.catalog import Kind
from masteryops.labqueue import (
    AlreadyClaimedError,
    AlreadyPassedError,
    AlreadyPendingError,
    BudgetExhaustedError,
    DemonstrationQueue,
    InvalidStateError,
    NotSessionExaminerError,
    PairSizeInvalidError,
    PushBackLockedError,
    QueuePolicy,
    SessionClosedError,
    SessionNotOpenError,
    SessionOverlapError,
    SheetMismatchError,
    TooManyAchievementsError,
    UnknownAchievementQueueError,
    draw_recheck,
)
from masteryops.ledger import (
    OutcomeEvent,
    PASS,
    RECHECK_FAIL,
    RECHECK_PASS,
    canonical_state,
    replay_state,
)

from conftest import Clock, Harness, build_catalog, sixty_lab_catalog


def lab_harness(policy=None, seed=7) -> Harness:
    return Harness(catalog=sixty_lab_catalog(), policy=policy or QueuePolicy(), seed=seed)


def assignment_catalog():
    """Two assignments to unlock re-checks plus regular material."""
    return build_catalog(
        {"3": ["as-1", "as-2"] + [f"reg-{i}" for i in range(10)]},
        kinds={"as-1": Kind.ASSIGNMENT, "as-2": Kind.ASSIGNMENT},
    )


# --- sessions ---------------------------------------------------------------

def test_open_twice_is_an_error():
    h = lab_harness()
    h.open_session()
    with pytest.raises(SessionOverlapError):
        h.open_session()


def test_close_without_open_is_an_error():
    h = lab_harness()
    with pytest.raises(SessionNotOpenError):
        h.queue.close_session(h.clock.now())


def test_close_cancels_pending_requests():
    h = lab_harness()
    h.open_session()
    for student in ("s1", "s2", "s3"):
        h.queue.submit_request([student], ["l3-00"], h.clock.tick())
    cancelled = h.queue.close_session(h.clock.tick())
    assert cancelled == 3
    state = h.ledger.state
    assert all(r.state == "cancelled" for r in state.requests.values())
    assert state.open_session_id is None


# --- submit ---------------------------------------------------------------------

def test_pair_submits_four_achievements():
    h = lab_harness()
    h.open_session()
    request = h.queue.submit_request(
        ["anna", "bert"], ["l3-00", "l3-01", "l3-02", "l3-03"], h.clock.tick()
    )
    assert request.state == "pending"
    assert request.requested == ("l3-00", "l3-01", "l3-02", "l3-03")
    assert request.rechecks == {}


def test_submit_requires_open_session():
    h = lab_harness()
    with pytest.raises(SessionClosedError):
        h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())


def test_one_pending_request_per_student():
    h = lab_harness()
    h.open_session()
    h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    with pytest.raises(AlreadyPendingError):
        h.queue.submit_request(["anna"], ["l3-01"], h.clock.tick())
    with pytest.raises(AlreadyPendingError):
        h.queue.submit_request(["bert", "anna"], ["l3-01"], h.clock.tick())


def test_cap_on_new_achievements():
    h = lab_harness()
    h.open_session()
    with pytest.raises(TooManyAchievementsError):
        h.queue.submit_request(["anna"], [f"l3-{i:02d}" for i in range(5)], h.clock.tick())


def test_pair_size_validation():
    h = lab_harness()
    h.open_session()
    with pytest.raises(PairSizeInvalidError):
        h.queue.submit_request([], ["l3-00"], h.clock.tick())
    with pytest.raises(PairSizeInvalidError):
        h.queue.submit_request(["a", "b", "c"], ["l3-00"], h.clock.tick())
    with pytest.raises(PairSizeInvalidError):
        h.queue.submit_request(["a", "a"], ["l3-00"], h.clock.tick())


def test_unknown_achievement_rejected():
    h = lab_harness()
    h.open_session()
    with pytest.raises(UnknownAchievementQueueError):
        h.queue.submit_request(["anna"], ["nope"], h.clock.tick())


def test_already_passed_rejected_for_full_pair_only():
    h = lab_harness()
    h.open_session()
    h.run_graded_request(["anna"], ["l3-00"])
    with pytest.raises(AlreadyPassedError):
        h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    # bert still needs it, so the pair may pitch it again
    request = h.queue.submit_request(["anna", "bert"], ["l3-00"], h.clock.tick())
    assert request.requested == ("l3-00",)


def test_session_attempt_cap():
    h = lab_harness(policy=QueuePolicy(per_session_attempt_cap=2))
    h.open_session()
    h.run_graded_request(["anna"], ["l3-00"])
    h.run_graded_request(["anna"], ["l3-01"])
    with pytest.raises(BudgetExhaustedError):
        h.queue.submit_request(["anna"], ["l3-02"], h.clock.tick())
    # a fresh session resets the per-session count
    h.queue.close_session(h.clock.tick())
    h.open_session()
    assert h.queue.submit_request(["anna"], ["l3-02"], h.clock.tick()).state == "pending"


def test_course_budget_exhausted():
    h = lab_harness(policy=QueuePolicy(attempt_budget=2, per_session_attempt_cap=2))
    h.open_session()
    h.run_graded_request(["anna"], ["l3-00"], verdict="fail")
    h.run_graded_request(["anna"], ["l3-00"], verdict="fail")
    h.queue.close_session(h.clock.tick())
    h.open_session()
    with pytest.raises(BudgetExhaustedError):
        h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())


def test_cancelled_requests_cost_nothing():
    h = lab_harness(policy=QueuePolicy(attempt_budget=1))
    h.open_session()
    request = h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    h.queue.cancel_request(request.id, h.clock.tick(), student="anna")
    assert h.ledger.state.students["anna"].attempts_used == 0
    assert h.queue.submit_request(["anna"], ["l3-01"], h.clock.tick()).state == "pending"


# --- re-check injection ------------------------------------------------------------

def recheck_ready_harness(seed=7):
    h = Harness(
        catalog=assignment_catalog(),
        policy=QueuePolicy(per_session_attempt_cap=20),
        seed=seed,
    )
    h.open_session()
    h.run_graded_request(["anna"], ["as-1", "as-2"])  # unlocks re-checks
    return h


def test_recheck_injected_once_eligible():
    h = recheck_ready_harness()
    request = h.queue.submit_request(["anna"], ["reg-0"], h.clock.tick())
    assert len(request.rechecks.get("anna", ())) == 1
    assert request.rechecks["anna"][0] in {"as-1", "as-2"}


def test_no_recheck_before_threshold():
    h = Harness(catalog=assignment_catalog())
    h.open_session()
    h.run_graded_request(["anna"], ["as-1"])
    request = h.queue.submit_request(["anna"], ["reg-0"], h.clock.tick())
    assert request.rechecks == {}


def test_recheck_plus_full_request_over_cap():
    h = recheck_ready_harness()
    with pytest.raises(TooManyAchievementsError):
        h.queue.submit_request(["anna"], ["reg-0", "reg-1", "reg-2", "reg-3"], h.clock.tick())


def test_no_new_random_recheck_while_one_pending():
    h = recheck_ready_harness()
    request = h.queue.submit_request(["anna"], ["reg-0"], h.clock.tick())
    injected = request.rechecks["anna"][0]
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    h.queue.record_results(
        request.id, {"anna": {"reg-0": "pass", injected: "fail"}}, h.clock.tick()
    )
    assert h.ledger.state.students["anna"].pending_rechecks == [injected]
    # the pending one is attached again; nothing new is drawn
    request2 = h.queue.submit_request(["anna"], ["reg-1"], h.clock.tick())
    assert request2.rechecks["anna"] == (injected,)


def test_pileup_displaces_requested_achievements():
    """Five outstanding re-checks crowd out the whole pitch at cap 4."""
    h = Harness(catalog=assignment_catalog(), policy=QueuePolicy(per_session_attempt_cap=20))
    h.open_session()
    h.run_graded_request(["anna"], ["as-1", "as-2", "reg-5", "reg-6"])
    h.run_graded_request(["anna"], ["reg-7"])
    # manual recheck-fail entries pile up a backlog (historical import / hand entry)
    for achievement in ("as-1", "as-2", "reg-5", "reg-6", "reg-7"):
        h.ledger.append(
            OutcomeEvent(
                seq=h.ledger.next_seq,
                ts=h.clock.tick(),
                student="anna",
                achievement=achievement,
                verdict=RECHECK_FAIL,
            )
        )
    assert len(h.ledger.state.students["anna"].pending_rechecks) == 5

    request = h.queue.submit_request(["anna"], ["reg-0", "reg-1"], h.clock.tick())
    assert request.requested == ()  # both new achievements displaced
    assert request.rechecks["anna"] == ("as-1", "as-2", "reg-5", "reg-6")  # oldest four


def test_partial_displacement_keeps_leading_requests():
    h = recheck_ready_harness()
    request = h.queue.submit_request(["anna"], ["reg-0"], h.clock.tick())
    injected = request.rechecks["anna"][0]
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    h.queue.record_results(
        request.id, {"anna": {"reg-0": "pass", injected: "fail"}}, h.clock.tick()
    )
    # one pending re-check leaves room for three requested achievements
    request2 = h.queue.submit_request(
        ["anna"], ["reg-1", "reg-2", "reg-3", "reg-4"], h.clock.tick()
    )
    assert request2.requested == ("reg-1", "reg-2", "reg-3")
    assert request2.rechecks["anna"] == (injected,)


def test_draw_recheck_uniform_within_five_sigma():
    rng = random.Random(20_16)
    passed = {f"ach-{i}" for i in range(10)}
    counts = {a: 0 for a in sorted(passed)}
    draws = 10_000
    for _ in range(draws):
        counts[draw_recheck(rng, passed)] += 1
    expected = draws / len(passed)
    sigma = (draws * 0.1 * 0.9) ** 0.5
    for achievement, count in counts.items():
        assert abs(count - expected) <= 5 * sigma, (achievement, count)


# --- feed / claim / position ----------------------------------------------------

def test_feed_fifo_and_contents():
    h = lab_harness()
    h.open_session()
    ids = []
    for index, student in enumerate(("s1", "s2", "s3")):
        request = h.queue.submit_request([student], [f"l3-{index:02d}"], h.clock.tick())
        ids.append(request.id)
    entries = h.queue.feed(h.clock.tick())
    assert [e.request for e in entries] == ids
    assert entries[0].requested == ("l3-00",)  # achievements visible to examiners
    assert entries[0].wait_ms > 0
    assert [e.position for e in entries] == [0, 1, 2]


def test_feed_empty():
    h = lab_harness()
    h.open_session()
    assert h.queue.feed(h.clock.now()) == []


def test_claim_any_position_and_first_wins():
    h = lab_harness()
    h.open_session()
    r1 = h.queue.submit_request(["s1"], ["l3-00"], h.clock.tick())
    r2 = h.queue.submit_request(["s2"], ["l3-01"], h.clock.tick())
    h.queue.claim(r2.id, "tutor1", h.clock.tick())  # not the head: allowed
    with pytest.raises(AlreadyClaimedError):
        h.queue.claim(r2.id, "tutor2", h.clock.tick())
    # idempotent for the same examiner
    again = h.queue.claim(r2.id, "tutor1", h.clock.tick())
    assert again.claimed_by == "tutor1"
    assert h.queue.queue_position(r1.id) == 0


def test_claim_requires_session_examiner():
    h = lab_harness()
    h.open_session(examiners=("tutor1",))
    request = h.queue.submit_request(["s1"], ["l3-00"], h.clock.tick())
    with pytest.raises(NotSessionExaminerError):
        h.queue.claim(request.id, "stranger", h.clock.tick())


def test_claim_appends_notification():
    h = lab_harness()
    h.open_session()
    request = h.queue.submit_request(["s1"], ["l3-00"], h.clock.tick())
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    kinds = [getattr(e, "kind", None) for e in h.ledger.records]
    assert "notified" in kinds


def test_position_decreases_as_earlier_requests_clear():
    h = lab_harness()
    h.open_session()
    r1 = h.queue.submit_request(["s1"], ["l3-00"], h.clock.tick())
    r2 = h.queue.submit_request(["s2"], ["l3-01"], h.clock.tick())
    r3 = h.queue.submit_request(["s3"], ["l3-02"], h.clock.tick())
    assert h.queue.queue_position(r3.id) == 2
    h.queue.claim(r1.id, "tutor1", h.clock.tick())
    assert h.queue.queue_position(r3.id) == 1
    assert h.queue.queue_position(r2.id) == 0


# --- grading -----------------------------------------------------------------------

def test_sheet_must_match_stated_achievements():
    h = lab_harness()
    h.open_session()
    request = h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    with pytest.raises(SheetMismatchError):
        h.queue.record_results(
            request.id, {"anna": {"l3-00": "pass", "l3-01": "pass"}}, h.clock.tick()
        )
    with pytest.raises(SheetMismatchError):
        h.queue.record_results(request.id, {"anna": {}}, h.clock.tick())


def test_pair_graded_independently():
    h = lab_harness()
    h.open_session()
    request = h.queue.submit_request(["anna", "bert"], ["l3-00"], h.clock.tick())
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    h.queue.record_results(
        request.id,
        {"anna": {"l3-00": "pass"}, "bert": {"l3-00": "fail"}},
        h.clock.tick(),
    )
    state = h.ledger.state
    assert "l3-00" in state.students["anna"].passed
    assert "l3-00" not in state.students["bert"].passed
    assert state.students["anna"].attempts_used == 1
    assert state.students["bert"].attempts_used == 1


def test_pushback_locks_for_session_only():
    h = lab_harness()
    h.open_session()
    h.run_graded_request(["anna"], ["l3-00"], verdict="pushback")
    with pytest.raises(PushBackLockedError):
        h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    h.queue.close_session(h.clock.tick())
    h.open_session()
    request = h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    assert request.state == "pending"


def test_pushback_on_recheck_is_plain_recheck_fail():
    h = recheck_ready_harness()
    request = h.queue.submit_request(["anna"], ["reg-0"], h.clock.tick())
    injected = request.rechecks["anna"][0]
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    events = h.queue.record_results(
        request.id, {"anna": {"reg-0": "pass", injected: "pushback"}}, h.clock.tick()
    )
    verdicts = {e.achievement: e.verdict for e in events}
    assert verdicts[injected] == RECHECK_FAIL
    record = h.ledger.state.students["anna"]
    assert injected in record.passed  # never lost
    assert all(lock[0] != injected for lock in record.pushback_locks)


def test_recheck_pass_recorded_and_cleared():
    h = recheck_ready_harness()
    request = h.queue.submit_request(["anna"], ["reg-0"], h.clock.tick())
    injected = request.rechecks["anna"][0]
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    events = h.queue.record_results(
        request.id, {"anna": {"reg-0": "pass", injected: "pass"}}, h.clock.tick()
    )
    verdicts = {e.achievement: e.verdict for e in events}
    assert verdicts[injected] == RECHECK_PASS
    assert h.ledger.state.students["anna"].pending_rechecks == []


def test_pitch_rejection_is_recorded_without_state_change():
    h = lab_harness()
    h.open_session()
    request = h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    h.queue.claim(request.id, "tutor1", h.clock.tick())
    h.queue.note_pitch_rejection(request.id, "tutor1", h.clock.tick(), note="no coherent story")
    assert h.ledger.state.requests[request.id].state == "claimed"  # informational only
    kinds = [getattr(e, "kind", None) for e in h.ledger.records]
    assert "pitch-rejected" in kinds
    # the demonstration can still be graded afterwards
    h.queue.record_results(request.id, {"anna": {"l3-00": "fail"}}, h.clock.tick())
    assert h.ledger.state.requests[request.id].state == "completed"


def test_results_need_claimed_request():
    h = lab_harness()
    h.open_session()
    request = h.queue.submit_request(["anna"], ["l3-00"], h.clock.tick())
    with pytest.raises(InvalidStateError):
        h.queue.record_results(request.id, {"anna": {"l3-00": "pass"}}, h.clock.tick())


# --- whole-lifecycle replay -----------------------------------------------------------

def test_replay_reproduces_queue_state():
    h = recheck_ready_harness()
    h.run_graded_request(["anna", "bert"], ["reg-1", "reg-2"], verdict="pass")
    h.run_graded_request(["bert"], ["reg-3"], verdict="pushback")
    h.queue.submit_request(["anna"], ["reg-4"], h.clock.tick())
    h.queue.close_session(h.clock.tick())
    fresh = replay_state(h.ledger.records)
    assert canonical_state(fresh) == canonical_state(h.ledger.state)


def test_capacity_arithmetic_at_defaults():
    policy = QueuePolicy()
    lab_achievements = sum(
        1 for a in sixty_lab_catalog().achievements if a.context.value == "lab-demonstrable"
    )
    assert lab_achievements == 60
    assert policy.attempt_budget * policy.per_attempt_cap >= 2 * lab_achievements
