import pytest

from masteryops.ledger import (
    CORRECTION_REVOKE,
    OutcomeEvent,
    PASS,
    RECHECK_FAIL,
)
from masteryops.planning import (
    CourseSchedule,
    Phase,
    PlanBook,
    ScheduleError,
    Sprint,
    SprintPlan,
    actual_burndown,
    cohort_burnup,
    derailment_check,
    dump_schedule,
    export_points,
    ideal_burndown,
    load_schedule,
    schedule_from_dict,
    schedule_to_dict,
)

from conftest import build_catalog

DAY = 86_400_000


def two_phase_schedule(start=0):
    return CourseSchedule(
        phases=(
            Phase(
                id="imperative",
                name="Imperative",
                sprints=(
                    Sprint("c1", start, start + 25 * DAY, assignments=("as-c1",)),
                    Sprint("c2", start + 25 * DAY, start + 50 * DAY, assignments=("as-c2",)),
                ),
            ),
            Phase(
                id="object-oriented",
                name="Object-oriented",
                sprints=(
                    Sprint("j1", start + 50 * DAY, start + 75 * DAY, assignments=("as-j1",)),
                    Sprint("j2", start + 75 * DAY, start + 100 * DAY, assignments=("as-j2",)),
                ),
            ),
        )
    )


def outcome(seq, student, achievement, verdict, ts, note=None):
    return OutcomeEvent(
        seq=seq, ts=ts, student=student, achievement=achievement, verdict=verdict, note=note
    )


# --- schedule shape -----------------------------------------------------------

def test_sprints_must_be_contiguous():
    with pytest.raises(ScheduleError):
        CourseSchedule(
            phases=(
                Phase("p", "P", (Sprint("s1", 0, 10), Sprint("s2", 20, 30))),
            )
        )


def test_deadlines():
    schedule = two_phase_schedule()
    sprints = schedule.sprints()
    assert schedule.soft_deadline(sprints[0]) == 25 * DAY
    assert schedule.hard_deadline(sprints[0]) == 50 * DAY
    # final sprint's hard deadline is the course end
    assert schedule.hard_deadline(sprints[-1]) == schedule.course_end


def test_schedule_roundtrip(tmp_path):
    schedule = two_phase_schedule()
    path = tmp_path / "schedule.json"
    dump_schedule(schedule, path)
    assert load_schedule(path) == schedule
    assert schedule_from_dict(schedule_to_dict(schedule)) == schedule


# --- ideal line -----------------------------------------------------------------

def test_ideal_line_midpoint():
    schedule = two_phase_schedule()
    line = ideal_burndown(schedule, 60)
    assert line.value(50 * DAY) == pytest.approx(30.0)


def test_ideal_line_zero_total():
    line = ideal_burndown(two_phase_schedule(), 0)
    assert line.value(0) == 0.0
    assert line.value(37 * DAY) == 0.0


def test_ideal_line_endpoints_exact():
    schedule = two_phase_schedule()
    line = ideal_burndown(schedule, 60)
    assert line.points() == ((schedule.course_start, 60.0), (schedule.course_end, 0.0))
    assert line.value(schedule.course_end) == 0.0


# --- actual burndown -------------------------------------------------------------

def burndown_catalog():
    return build_catalog({"3": ["a", "b", "c"], "4": ["d"], "5": ["e"]})


def test_burndown_constant_without_passes():
    series = actual_burndown([], "stu", "3", burndown_catalog(), two_phase_schedule())
    assert series.points == ((0, 3),)


def test_burndown_ignores_levels_above_target():
    events = [outcome(1, "stu", "e", PASS, ts=5 * DAY)]
    series = actual_burndown(events, "stu", "3", burndown_catalog(), two_phase_schedule())
    assert series.points == ((0, 3),)  # level-5 pass does not reduce the level-3 gap


def test_burndown_steps_per_pass():
    events = [
        outcome(1, "stu", "a", PASS, ts=1 * DAY),
        outcome(2, "stu", "b", PASS, ts=2 * DAY),
        outcome(3, "stu", "c", PASS, ts=3 * DAY),
    ]
    series = actual_burndown(events, "stu", "3", burndown_catalog(), two_phase_schedule())
    assert series.points == ((0, 3), (1 * DAY, 2), (2 * DAY, 1), (3 * DAY, 0))
    values = [v for _, v in series.points]
    assert values == sorted(values, reverse=True)  # non-increasing


def test_burndown_revocation_steps_up():
    events = [
        outcome(1, "stu", "a", PASS, ts=1 * DAY),
        outcome(2, "stu", "a", CORRECTION_REVOKE, ts=2 * DAY, note="entry error"),
    ]
    series = actual_burndown(events, "stu", "3", burndown_catalog(), two_phase_schedule())
    assert series.points == ((0, 3), (1 * DAY, 2), (2 * DAY, 3))


def test_burndown_recheck_fail_changes_nothing():
    events = [
        outcome(1, "stu", "a", PASS, ts=1 * DAY),
        outcome(2, "stu", "a", RECHECK_FAIL, ts=2 * DAY),
    ]
    series = actual_burndown(events, "stu", "3", burndown_catalog(), two_phase_schedule())
    assert series.points == ((0, 3), (1 * DAY, 2))


# --- burnup ------------------------------------------------------------------------

def test_burnup_empty_log():
    assert cohort_burnup([], burndown_catalog()) == {}


def test_burnup_final_counts():
    events = []
    for i, ach in enumerate(["a", "b", "c"]):
        events.append(outcome(len(events) + 1, "anna", ach, PASS, ts=i * DAY))
    for i, ach in enumerate(["a", "b", "c", "d", "e"]):
        events.append(outcome(len(events) + 1, "bert", ach, PASS, ts=i * DAY))
    chart = cohort_burnup(events, burndown_catalog())
    assert chart["anna"][-1][1] == 3
    assert chart["bert"][-1][1] == 5
    for series in chart.values():
        counts = [v for _, v in series]
        assert counts == sorted(counts)  # monotone without revocations


def test_burnup_steps_down_on_revocation():
    events = [
        outcome(1, "anna", "a", PASS, ts=1 * DAY),
        outcome(2, "anna", "a", CORRECTION_REVOKE, ts=2 * DAY, note="typo"),
    ]
    chart = cohort_burnup(events, burndown_catalog())
    assert chart["anna"] == [(1 * DAY, 1), (2 * DAY, 0)]


# --- derailment ---------------------------------------------------------------------

def derailment_catalog():
    from masteryops.catalog import Kind

    return build_catalog(
        {"3": ["as-c1", "as-c2", "as-j1", "as-j2", "x"]},
        kinds={a: Kind.ASSIGNMENT for a in ("as-c1", "as-c2", "as-j1", "as-j2")},
    )


def test_assignment_passed_before_hard_deadline_not_flagged():
    schedule = two_phase_schedule()
    events = [outcome(1, "stu", "as-c1", PASS, ts=50 * DAY - 3_600_000)]
    flags = derailment_check(events, schedule, now=51 * DAY)
    assert all(f.achievement != "as-c1" for f in flags)


def test_assignment_unpassed_past_hard_deadline_flagged():
    schedule = two_phase_schedule()
    events = [outcome(1, "stu", "x", PASS, ts=1 * DAY)]  # present in log, no assignment
    flags = derailment_check(events, schedule, now=51 * DAY)
    assert any(f.student == "stu" and f.achievement == "as-c1" for f in flags)


def test_soft_deadline_miss_alone_not_flagged():
    schedule = two_phase_schedule()
    events = [outcome(1, "stu", "x", PASS, ts=1 * DAY)]
    # past c1's soft deadline (25d) but before its hard deadline (50d)
    flags = derailment_check(events, schedule, now=30 * DAY)
    assert flags == []


def test_derailment_monotone_in_now():
    schedule = two_phase_schedule()
    events = [outcome(1, "stu", "x", PASS, ts=1 * DAY)]
    earlier = {(f.student, f.achievement) for f in derailment_check(events, schedule, 60 * DAY)}
    later = {(f.student, f.achievement) for f in derailment_check(events, schedule, 80 * DAY)}
    assert earlier <= later


# --- plans & export -------------------------------------------------------------------

def test_plan_validates_against_catalog():
    book = PlanBook(burndown_catalog())
    book.record(SprintPlan("stu", "c1", frozenset({"a", "b"})))
    with pytest.raises(ScheduleError):
        book.record(SprintPlan("stu", "c1", frozenset({"nope"})))


def test_export_points_format():
    text = export_points([("stu:actual", [(0, 3.0), (5, 2.0)]), ("stu:ideal", [(0, 3.0)])])
    lines = text.strip().split("\n")
    assert lines[0] == "series\ttimestamp_ms\tvalue"
    assert lines[1] == "stu:actual\t0\t3"
    assert len(lines) == 4
