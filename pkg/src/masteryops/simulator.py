"""Discrete-event simulation of lab-session queues, plus the Erlang-C oracle.

Two modes share one event loop style: ``mmc`` is a textbook M/M/c queue used
to validate the simulator against the analytic Erlang-C delay formula;
``course`` models students cycling through work, demonstration requests and
re-requests against a crew of examiners for one lab session, respecting the
per-session attempt budget and the session end.

Randomness comes from ``random.Random`` (Mersenne Twister, MT19937), seeded
per run; course mode derives one independent substream per student so that
staffing levels can be compared under common random numbers. Event ties are
broken by an insertion sequence number, so a given config and seed always
reproduces the identical event trace.
"""
from __future__ import annotations

import heapq
import json
import math
import random
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .analytics import nearest_rank


class SimulationError(Exception):
    pass


class UnstableSystemError(SimulationError):
    pass


@dataclass(frozen=True)
class MmcConfig:
    arrival_rate: float
    service_rate: float
    servers: int
    jobs: int
    seed: int = 0
    mode: str = "mmc"

    def __post_init__(self):
        if self.servers < 1:
            raise SimulationError("servers must be >= 1")
        if self.arrival_rate <= 0 or self.service_rate <= 0:
            raise SimulationError("rates must be positive")
        if self.arrival_rate >= self.servers * self.service_rate:
            raise UnstableSystemError(
                f"unstable: arrival rate {self.arrival_rate} >= capacity "
                f"{self.servers * self.service_rate}"
            )
        if self.jobs < 1:
            raise SimulationError("jobs must be >= 1")


@dataclass(frozen=True)
class CourseConfig:
    """One simulated lab session; all times in minutes."""

    servers: int = 7
    students: int = 100
    session_minutes: float = 240.0
    think_time_mean: float = 20.0
    failure_probability: float = 0.25
    pushback_probability: float = 0.1
    re_request_delay_mean: float = 15.0
    per_attempt_cap: int = 4
    session_attempt_budget: int = 2
    achievements_per_student: int = 8
    service_median: float = 10.0
    service_sigma: float = 0.5
    seed: int = 0
    mode: str = "course"

    def __post_init__(self):
        if self.servers < 1 or self.students < 1:
            raise SimulationError("servers and students must be >= 1")
        if not 0.0 <= self.failure_probability <= 1.0:
            raise SimulationError("failure_probability must be in [0, 1]")
        if not 0.0 <= self.pushback_probability <= 1.0:
            raise SimulationError("pushback_probability must be in [0, 1]")
        if self.session_minutes <= 0:
            raise SimulationError("session_minutes must be positive")
        if self.per_attempt_cap < 1 or self.session_attempt_budget < 1:
            raise SimulationError("caps and budgets must be >= 1")


SimConfig = MmcConfig | CourseConfig


@dataclass(frozen=True)
class SimResult:
    mode: str
    jobs_generated: int
    jobs_completed: int
    in_system_at_end: int
    rejected_at_session_end: int
    mean_wait: float | None
    median_wait: float | None
    p90_wait: float | None
    utilization: float
    per_server_busy: tuple[float, ...]
    queue_length_avg: float
    makespan: float


def erlang_c_probability(servers: int, offered_load: float) -> float:
    """Probability an arriving job must wait in an M/M/c queue.

    Uses the numerically stable Erlang-B recurrence, then the standard
    B-to-C conversion; safe for large server counts.
    """
    blocking = 1.0
    for k in range(1, servers + 1):
        blocking = offered_load * blocking / (k + offered_load * blocking)
    rho = offered_load / servers
    return blocking / (1.0 - rho + rho * blocking)


def erlang_c_wait(arrival_rate: float, service_rate: float, servers: int) -> float:
    """Mean queueing delay of an M/M/c system (excludes service time)."""
    if servers < 1:
        raise SimulationError("servers must be >= 1")
    if arrival_rate < 0 or service_rate <= 0:
        raise SimulationError("rates must be non-negative / positive")
    if arrival_rate == 0:
        return 0.0
    if arrival_rate >= servers * service_rate:
        raise UnstableSystemError(
            f"unstable: arrival rate {arrival_rate} >= capacity {servers * service_rate}"
        )
    offered_load = arrival_rate / service_rate
    wait_probability = erlang_c_probability(servers, offered_load)
    return wait_probability / (servers * service_rate - arrival_rate)


def _wait_stats(waits: list[float]):
    if not waits:
        return None, None, None
    ordered = sorted(waits)
    mean = sum(ordered) / len(ordered)
    return mean, nearest_rank(ordered, 50), nearest_rank(ordered, 90)


class _Servers:
    """Fixed server pool with lowest-index dispatch and busy-time accounting."""

    def __init__(self, count: int):
        self.free: list[int] = list(range(count))
        heapq.heapify(self.free)
        self.busy_time = [0.0] * count

    def any_free(self) -> bool:
        return bool(self.free)

    def seize(self, busy_credit: float) -> int:
        server = heapq.heappop(self.free)
        self.busy_time[server] += busy_credit
        return server

    def release(self, server: int) -> None:
        heapq.heappush(self.free, server)


def run_sim(config: SimConfig, trace: list[str] | None = None) -> SimResult:
    """Run one simulation; deterministic for a given config and seed."""
    if isinstance(config, MmcConfig):
        return _run_mmc(config, trace)
    return _run_course(config, trace)


def _run_mmc(config: MmcConfig, trace: list[str] | None) -> SimResult:
    rng = random.Random(config.seed)
    events: list[tuple[float, int, str, tuple]] = []
    seq = 0

    def push(time: float, kind: str, payload: tuple) -> None:
        nonlocal seq
        heapq.heappush(events, (time, seq, kind, payload))
        seq += 1

    servers = _Servers(config.servers)
    waiting: deque[tuple[int, float]] = deque()
    waits: list[float] = []
    generated = completed = 0
    queue_area = 0.0
    last_time = 0.0
    now = 0.0

    push(rng.expovariate(config.arrival_rate), "arrival", (0,))

    def start_service(job: int, arrived: float) -> None:
        waits.append(now - arrived)
        duration = rng.expovariate(config.service_rate)
        server = servers.seize(duration)
        push(now + duration, "departure", (job, server))
        if trace is not None:
            trace.append(f"{now:.6f}\tstart\tjob={job}\tserver={server}")

    while events:
        now, _, kind, payload = heapq.heappop(events)
        queue_area += len(waiting) * (now - last_time)
        last_time = now
        if kind == "arrival":
            job = payload[0]
            generated += 1
            if trace is not None:
                trace.append(f"{now:.6f}\tarrival\tjob={job}")
            if servers.any_free():
                start_service(job, now)
            else:
                waiting.append((job, now))
            if generated < config.jobs:
                push(now + rng.expovariate(config.arrival_rate), "arrival", (job + 1,))
        else:
            job, server = payload
            completed += 1
            servers.release(server)
            if trace is not None:
                trace.append(f"{now:.6f}\tdeparture\tjob={job}\tserver={server}")
            if waiting:
                next_job, arrived = waiting.popleft()
                start_service(next_job, arrived)

    makespan = last_time
    mean, median, p90 = _wait_stats(waits)
    total_busy = sum(servers.busy_time)
    return SimResult(
        mode="mmc",
        jobs_generated=generated,
        jobs_completed=completed,
        in_system_at_end=0,
        rejected_at_session_end=0,
        mean_wait=mean,
        median_wait=median,
        p90_wait=p90,
        utilization=total_busy / (config.servers * makespan) if makespan else 0.0,
        per_server_busy=tuple(b / makespan if makespan else 0.0 for b in servers.busy_time),
        queue_length_avg=queue_area / makespan if makespan else 0.0,
        makespan=makespan,
    )


class _SimStudent:
    def __init__(self, index: int, config: CourseConfig, seed: int):
        self.index = index
        self.rng = random.Random(seed * 1_000_003 + index + 1)
        self.options = list(range(config.achievements_per_student))
        self.attempts_used = 0


def _run_course(config: CourseConfig, trace: list[str] | None) -> SimResult:
    """One lab session: students think, request, wait, demonstrate, re-request.

    Failed requests re-enter after a delay; a push-back drops the first
    pitched achievement from the student's options for the session. The
    world stops at session end: jobs still waiting are rejected, jobs in
    service are counted as in-system.
    """
    session_end = config.session_minutes
    students = [_SimStudent(i, config, config.seed) for i in range(config.students)]
    events: list[tuple[float, int, str, tuple]] = []
    seq = 0

    def push(time: float, kind: str, payload: tuple) -> None:
        nonlocal seq
        heapq.heappush(events, (time, seq, kind, payload))
        seq += 1

    servers = _Servers(config.servers)
    waiting: deque[tuple[int, float, tuple[int, ...], float]] = deque()
    waits: list[float] = []
    generated = completed = in_service = 0
    queue_area = 0.0
    last_time = 0.0
    now = 0.0

    for student in students:
        push(student.rng.expovariate(1.0 / config.think_time_mean), "submit", (student.index,))

    def start_service(student_index: int, arrived: float, pitched: tuple[int, ...], duration: float) -> None:
        nonlocal in_service
        waits.append(now - arrived)
        # only the in-session part of a service that runs past close counts as busy
        server = servers.seize(min(duration, session_end - now))
        in_service += 1
        push(now + duration, "departure", (student_index, server, pitched))
        if trace is not None:
            trace.append(f"{now:.6f}\tstart\tstudent={student_index}\tserver={server}")

    while events and events[0][0] < session_end:
        now, _, kind, payload = heapq.heappop(events)
        queue_area += len(waiting) * (now - last_time)
        last_time = now

        if kind == "submit":
            student = students[payload[0]]
            if not student.options or student.attempts_used >= config.session_attempt_budget:
                continue
            pitched = tuple(student.options[: config.per_attempt_cap])
            duration = student.rng.lognormvariate(
                math.log(config.service_median), config.service_sigma
            )
            generated += 1
            if trace is not None:
                trace.append(f"{now:.6f}\tsubmit\tstudent={student.index}\tpitch={len(pitched)}")
            if servers.any_free():
                start_service(student.index, now, pitched, duration)
            else:
                waiting.append((student.index, now, pitched, duration))

        else:  # departure
            student_index, server, pitched = payload
            student = students[student_index]
            servers.release(server)
            in_service -= 1
            completed += 1
            student.attempts_used += 1
            failed = student.rng.random() < config.failure_probability
            if failed:
                if student.rng.random() < config.pushback_probability and pitched:
                    # deep misunderstanding: blocked for the rest of the session
                    if pitched[0] in student.options:
                        student.options.remove(pitched[0])
                next_at = now + student.rng.expovariate(1.0 / config.re_request_delay_mean)
            else:
                student.options = [a for a in student.options if a not in pitched]
                next_at = now + student.rng.expovariate(1.0 / config.think_time_mean)
            if trace is not None:
                verdict = "fail" if failed else "pass"
                trace.append(f"{now:.6f}\tdeparture\tstudent={student_index}\tverdict={verdict}")
            if student.options and student.attempts_used < config.session_attempt_budget:
                push(next_at, "submit", (student_index,))
            if waiting:
                next_student, arrived, next_pitched, next_duration = waiting.popleft()
                start_service(next_student, arrived, next_pitched, next_duration)

    queue_area += len(waiting) * (session_end - last_time)
    mean, median, p90 = _wait_stats(waits)
    total_busy = sum(servers.busy_time)
    return SimResult(
        mode="course",
        jobs_generated=generated,
        jobs_completed=completed,
        in_system_at_end=in_service,
        rejected_at_session_end=len(waiting),
        mean_wait=mean,
        median_wait=median,
        p90_wait=p90,
        utilization=total_busy / (config.servers * session_end),
        per_server_busy=tuple(b / session_end for b in servers.busy_time),
        queue_length_avg=queue_area / session_end,
        makespan=session_end,
    )


# --- config & result I/O ------------------------------------------------------

def sim_config_from_dict(doc: dict) -> SimConfig:
    mode = doc.get("mode")
    fields = {k: v for k, v in doc.items() if k != "mode"}
    try:
        if mode == "mmc":
            return MmcConfig(**fields)
        if mode == "course":
            return CourseConfig(**fields)
    except TypeError as exc:
        raise SimulationError(f"bad simulation config: {exc}") from exc
    raise SimulationError(f"mode must be 'mmc' or 'course', got {mode!r}")


def load_sim_config(path: str | Path) -> SimConfig:
    with open(path, encoding="utf-8") as handle:
        return sim_config_from_dict(json.load(handle))


def render_result(result: SimResult) -> str:
    rows: list[tuple[str, object]] = [
        ("mode", result.mode),
        ("jobs_generated", result.jobs_generated),
        ("jobs_completed", result.jobs_completed),
        ("in_system_at_end", result.in_system_at_end),
        ("rejected_at_session_end", result.rejected_at_session_end),
        ("mean_wait", _fmt(result.mean_wait)),
        ("median_wait", _fmt(result.median_wait)),
        ("p90_wait", _fmt(result.p90_wait)),
        ("utilization", _fmt(result.utilization)),
        ("queue_length_avg", _fmt(result.queue_length_avg)),
        ("makespan", _fmt(result.makespan)),
    ]
    for index, busy in enumerate(result.per_server_busy):
        rows.append((f"server_{index}_busy", _fmt(busy)))
    lines = ["metric\tvalue"]
    lines.extend(f"{name}\t{value}" for name, value in rows)
    return "\n".join(lines) + "\n"


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"
