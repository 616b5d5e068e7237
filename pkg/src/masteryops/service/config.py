"""Service configuration: one JSON file plus environment overrides.

``MASTERYOPS_PORT`` and ``MASTERYOPS_LEDGER`` override the file values, so
deployments can relocate the ledger without editing config.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..labqueue import QueuePolicy

ENV_PORT = "MASTERYOPS_PORT"
ENV_LEDGER = "MASTERYOPS_LEDGER"


@dataclass
class ServiceConfig:
    catalog: str
    schedule: str
    ledger: str
    tokens: str
    host: str = "127.0.0.1"
    port: int = 8000
    seed: int = 0
    write_lock_timeout_ms: int = 2000
    static_dir: str | None = None  # built web client, served at /ui when set
    policy: QueuePolicy = field(default_factory=QueuePolicy)


def load_config(path: str | Path) -> ServiceConfig:
    base = Path(path).parent
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)

    def resolve(name: str) -> str:
        value = doc[name]
        return str((base / value) if not os.path.isabs(value) else Path(value))

    policy = QueuePolicy(**doc.get("policy", {}))
    config = ServiceConfig(
        catalog=resolve("catalog"),
        schedule=resolve("schedule"),
        ledger=resolve("ledger"),
        tokens=resolve("tokens"),
        host=doc.get("host", "127.0.0.1"),
        port=int(doc.get("port", 8000)),
        seed=int(doc.get("seed", 0)),
        write_lock_timeout_ms=int(doc.get("write_lock_timeout_ms", 2000)),
        static_dir=resolve("static_dir") if doc.get("static_dir") else None,
        policy=policy,
    )
    if os.environ.get(ENV_PORT):
        config.port = int(os.environ[ENV_PORT])
    if os.environ.get(ENV_LEDGER):
        config.ledger = os.environ[ENV_LEDGER]
    return config
