"""Checkpointed, traceable session history.

Every prompt and every GUI action appends a checkpoint holding a full,
self-contained session snapshot. Restoring moves the head without
discarding anything, so any previous workspace stays reachable. The clock
is injectable: replay runs pass a counter so manifests stay byte-stable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from .errors import UnknownCheckpointError
from .session import Session

ORIGINS = ("user-prompt", "system", "action")


@dataclass(frozen=True)
class Checkpoint:
    id: str
    label: str
    origin: str
    snapshot: Session
    created: float

    def manifest_entry(self) -> dict:
        return {"id": self.id, "label": self.label, "origin": self.origin,
                "timestamp": self.created}

    def to_json(self) -> dict:
        entry = self.manifest_entry()
        entry["snapshot"] = self.snapshot.to_json()
        return entry

    @classmethod
    def from_json(cls, raw: dict) -> "Checkpoint":
        return cls(
            id=raw.get("id", ""), label=raw.get("label", ""),
            origin=raw.get("origin", "system"),
            snapshot=Session.from_json(raw.get("snapshot", {})),
            created=float(raw.get("timestamp", 0.0)),
        )


@dataclass(frozen=True)
class History:
    checkpoints: tuple[Checkpoint, ...] = ()
    head: int = -1

    def at_head(self) -> Checkpoint | None:
        if 0 <= self.head < len(self.checkpoints):
            return self.checkpoints[self.head]
        return None

    def find(self, checkpoint_id: str) -> Checkpoint:
        for cp in self.checkpoints:
            if cp.id == checkpoint_id:
                return cp
        raise UnknownCheckpointError(f"no checkpoint {checkpoint_id!r}")

    def manifest(self) -> list[dict]:
        out = []
        for i, cp in enumerate(self.checkpoints):
            entry = cp.manifest_entry()
            entry["head"] = i == self.head
            out.append(entry)
        return out

    def to_json(self) -> dict:
        return {"head": self.head, "checkpoints": [cp.to_json() for cp in self.checkpoints]}

    @classmethod
    def from_json(cls, raw: dict) -> "History":
        return cls(
            checkpoints=tuple(Checkpoint.from_json(c) for c in raw.get("checkpoints", [])),
            head=int(raw.get("head", -1)),
        )


def checkpoint(history: History, session: Session, label: str, origin: str,
               clock: Callable[[], float] | None = None) -> tuple[History, str]:
    """Append a snapshot and advance the head."""
    created = (clock or time.time)()
    cp_id = f"ckpt-{len(history.checkpoints) + 1}"
    cp = Checkpoint(id=cp_id, label=label, origin=origin, snapshot=session, created=created)
    return History(checkpoints=history.checkpoints + (cp,), head=len(history.checkpoints)), cp_id


def restore(history: History, checkpoint_id: str) -> tuple[History, Session]:
    """Move the head to *checkpoint_id* and hand back its snapshot.

    Non-destructive: later checkpoints stay in the list.
    """
    cp = history.find(checkpoint_id)
    index = history.checkpoints.index(cp)
    return History(checkpoints=history.checkpoints, head=index), cp.snapshot
