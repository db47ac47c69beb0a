"""Annotation manifest: per-item state, the status machine, NDJSON persistence.

The manifest file is newline-delimited JSON, one record per line, with the
exact field set id, domain, class_id, media_paths, media_kind, question,
caption, status, attempt, updated_at (RFC 3339). The store is single-writer:
all mutations funnel through methods that hold the store lock, and every
status change is checked against the legal transition table.
"""

from __future__ import annotations

import enum
import json
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from ..errors import EvcapError, ParseError


class DomainKind(enum.Enum):
    STATIC_IMAGES = "static_images"
    HUMAN_MOTIONS = "human_motions"
    DRIVE_SCENES = "drive_scenes"


class MediaKind(enum.Enum):
    IMAGE = "image"
    FRAME_SEQUENCE = "frame_sequence"
    EVENT_STREAM = "event_stream"


class Status(enum.Enum):
    PENDING = "pending"
    CAPTIONED = "captioned"
    QA_SAMPLED = "qa_sampled"
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    REGENERATING = "regenerating"


# status machine: pending -> captioned -> qa_sampled -> accepted, with
# class-wide bad verdicts sending any captioned-or-later record back through
# regenerating -> captioned. REJECTED is reserved and never produced.
LEGAL_TRANSITIONS: dict[Status, frozenset[Status]] = {
    Status.PENDING: frozenset({Status.CAPTIONED}),
    Status.CAPTIONED: frozenset({Status.QA_SAMPLED, Status.REGENERATING}),
    Status.QA_SAMPLED: frozenset({Status.ACCEPTED, Status.REGENERATING}),
    Status.ACCEPTED: frozenset({Status.REGENERATING}),
    Status.REGENERATING: frozenset({Status.CAPTIONED, Status.REGENERATING}),
    Status.REJECTED: frozenset(),
}


def now_rfc3339() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    domain: DomainKind
    class_id: str
    media_paths: tuple[str, ...]
    media_kind: MediaKind
    question: str = ""
    caption: str = ""
    status: Status = Status.PENDING
    attempt: int = 0
    updated_at: str = field(default_factory=now_rfc3339)

    def __post_init__(self) -> None:
        if self.attempt < 0:
            raise EvcapError(f"attempt must be >= 0, got {self.attempt}")
        if (self.status is Status.PENDING) != (self.caption == ""):
            raise EvcapError(
                f"record {self.id}: caption must be nonempty exactly when status leaves "
                f"pending (status={self.status.value}, caption={self.caption!r})"
            )

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "domain": self.domain.value,
                "class_id": self.class_id,
                "media_paths": list(self.media_paths),
                "media_kind": self.media_kind.value,
                "question": self.question,
                "caption": self.caption,
                "status": self.status.value,
                "attempt": self.attempt,
                "updated_at": self.updated_at,
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "ManifestRecord":
        try:
            raw = json.loads(line)
            return cls(
                id=raw["id"],
                domain=DomainKind(raw["domain"]),
                class_id=raw["class_id"],
                media_paths=tuple(raw["media_paths"]),
                media_kind=MediaKind(raw["media_kind"]),
                question=raw["question"],
                caption=raw["caption"],
                status=Status(raw["status"]),
                attempt=int(raw["attempt"]),
                updated_at=raw["updated_at"],
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"bad manifest line: {exc}") from exc


def transition(record: ManifestRecord, new_status: Status, **changes) -> ManifestRecord:
    """Move a record to new_status, enforcing the status machine."""
    if new_status not in LEGAL_TRANSITIONS[record.status]:
        raise EvcapError(
            f"illegal transition {record.status.value} -> {new_status.value} for {record.id}"
        )
    return replace(record, status=new_status, updated_at=now_rfc3339(), **changes)


class ManifestStore:
    """Ordered id -> record map with a writer lock and NDJSON round-trip."""

    def __init__(self, path: str | None = None):
        self.path = path
        self._records: dict[str, ManifestRecord] = {}
        self._lock = threading.RLock()

    # -- queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._records)

    def get(self, record_id: str) -> ManifestRecord:
        with self._lock:
            return self._records[record_id]

    def records(self) -> list[ManifestRecord]:
        with self._lock:
            return list(self._records.values())

    def by_status(self, *statuses: Status) -> list[ManifestRecord]:
        wanted = set(statuses)
        with self._lock:
            return [r for r in self._records.values() if r.status in wanted]

    def by_class(self, class_id: str) -> list[ManifestRecord]:
        with self._lock:
            return [r for r in self._records.values() if r.class_id == class_id]

    def class_ids(self) -> list[str]:
        with self._lock:
            seen = dict.fromkeys(r.class_id for r in self._records.values())
            return list(seen)

    def stats(self) -> dict:
        with self._lock:
            by_status = {s.value: 0 for s in Status}
            by_domain: dict[str, int] = {}
            for r in self._records.values():
                by_status[r.status.value] += 1
                by_domain[r.domain.value] = by_domain.get(r.domain.value, 0) + 1
            return {"by_status": by_status, "by_domain": by_domain, "total": len(self._records)}

    # -- mutations ----------------------------------------------------------

    def add(self, record: ManifestRecord) -> None:
        with self._lock:
            if record.id in self._records:
                raise EvcapError(f"duplicate record id {record.id}")
            self._records[record.id] = record

    def update(self, record: ManifestRecord) -> None:
        with self._lock:
            if record.id not in self._records:
                raise EvcapError(f"unknown record id {record.id}")
            self._records[record.id] = record

    # -- persistence ----------------------------------------------------------

    def save(self, path: str | None = None) -> None:
        target = path or self.path
        if target is None:
            raise EvcapError("manifest store has no path")
        with self._lock:
            payload = "".join(r.to_json() + "\n" for r in self._records.values())
        tmp = f"{target}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, target)

    @classmethod
    def load(cls, path: str) -> "ManifestStore":
        store = cls(path)
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    store.add(ManifestRecord.from_json(line))
        return store
