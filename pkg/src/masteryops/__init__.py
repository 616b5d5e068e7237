"""Course operations engine for mastery-learning courses.

Modules:
    catalog    achievement catalog and all grade arithmetic
    ledger     append-only outcome log, replay, persistence
    labqueue   live demonstration queue (sessions, claims, grading)
    planning   sprints, deadlines, burndown/burnup, derailment
    analytics  event-log mining (waits, popularity, cohort progress)
    simulator  M/M/c and course-mode queue simulation, Erlang-C oracle
    service    FastAPI wire layer
    cli        administrative command line
"""

__version__ = "0.1.0"
