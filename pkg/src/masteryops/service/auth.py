"""Bearer-token authentication with a static token file.

The token file maps opaque token strings to an actor id and role; real
identity management is deliberately out of scope.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

ROLES = ("student", "examiner", "admin")


@dataclass(frozen=True)
class ApiSession:
    actor: str
    role: str


def load_tokens(path: str | Path) -> dict[str, ApiSession]:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    sessions: dict[str, ApiSession] = {}
    for token, entry in doc.items():
        role = entry["role"]
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r} for token {token!r}")
        sessions[token] = ApiSession(actor=entry["actor"], role=role)
    return sessions
