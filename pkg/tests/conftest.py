import random
from dataclasses import dataclass, field

import pytest

from masteryops.catalog import Achievement, AchievementGroup, Context, CourseCatalog, Kind
from masteryops.labqueue import DemonstrationQueue, QueuePolicy
from masteryops.ledger import Ledger


def build_catalog(
    levels_map: dict[str, list[str]],
    kinds: dict[str, Kind] | None = None,
    contexts: dict[str, Context] | None = None,
    **overrides,
) -> CourseCatalog:
    """Catalog from {level: [achievement ids]} plus optional kind/context maps."""
    kinds = kinds or {}
    contexts = contexts or {}
    achievements = []
    for level, ids in levels_map.items():
        for achievement_id in ids:
            achievements.append(
                Achievement(
                    id=achievement_id,
                    name=achievement_id.upper(),
                    group="g1",
                    level=level,
                    kind=kinds.get(achievement_id, Kind.REGULAR),
                    context=contexts.get(achievement_id, Context.LAB),
                )
            )
    return CourseCatalog(
        achievements=tuple(achievements),
        groups=(AchievementGroup(id="g1", name="General"),),
        levels=tuple(sorted(levels_map, key=list(levels_map).index)),
        **overrides,
    )


@pytest.fixture
def tiny_catalog() -> CourseCatalog:
    # levels {3:{a,b}, 4:{c}, 5:{d}}
    return build_catalog({"3": ["a", "b"], "4": ["c"], "5": ["d"]})


def sixty_lab_catalog() -> CourseCatalog:
    """60 lab-demonstrable achievements, 20 per level, no assignments."""
    return build_catalog(
        {
            "3": [f"l3-{i:02d}" for i in range(20)],
            "4": [f"l4-{i:02d}" for i in range(20)],
            "5": [f"l5-{i:02d}" for i in range(20)],
        }
    )


@dataclass
class Clock:
    t: int = 1_000_000

    def tick(self, ms: int = 60_000) -> int:
        self.t += ms
        return self.t

    def now(self) -> int:
        return self.t


@dataclass
class Harness:
    """A queue engine over an in-memory ledger with a controllable clock."""

    catalog: CourseCatalog
    policy: QueuePolicy = field(default_factory=QueuePolicy)
    seed: int = 7
    clock: Clock = field(default_factory=Clock)

    def __post_init__(self):
        self.ledger = Ledger()
        self.queue = DemonstrationQueue(
            self.ledger, self.catalog, self.policy, random.Random(self.seed)
        )
        self._session_counter = 0

    def open_session(self, examiners=("tutor1", "tutor2"), hours: int = 4) -> str:
        self._session_counter += 1
        session_id = f"s{self._session_counter:03d}"
        opens = self.clock.now()
        self.queue.open_session(
            session_id, opens, opens + hours * 3_600_000, examiners, opens
        )
        return session_id

    def run_graded_request(self, students, achievements, verdict="pass", examiner="tutor1"):
        """Submit, claim and grade one request; same verdict for everything."""
        request = self.queue.submit_request(students, achievements, self.clock.tick())
        self.queue.claim(request.id, examiner, self.clock.tick())
        sheet = {}
        for student in request.students:
            stated = list(request.requested)
            for extra in request.rechecks.get(student, ()):
                if extra not in stated:
                    stated.append(extra)
            sheet[student] = {a: verdict for a in stated}
        self.queue.record_results(request.id, sheet, self.clock.tick())
        return request
