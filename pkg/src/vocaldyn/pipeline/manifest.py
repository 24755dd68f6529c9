"""Performance manifest: the single source of truth for curation state.

Records move pending -> features_done -> aligned -> (accepted | rejected),
accepted -> labeled; rejected is terminal. Saves are atomic (temp file +
rename) and preserve fields this code does not know about.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

STATUSES = ("pending", "features_done", "aligned", "accepted", "rejected", "labeled")
_TRANSITIONS = {
    "pending": {"features_done"},
    "features_done": {"aligned"},
    "aligned": {"accepted", "rejected"},
    "accepted": {"labeled"},
    "rejected": set(),
    "labeled": set(),
}
# how far along the linear pipeline each status is; rejected parks at aligned
STATUS_RANK = {
    "pending": 0,
    "features_done": 1,
    "aligned": 2,
    "accepted": 3,
    "rejected": 3,
    "labeled": 4,
}

_KNOWN_FIELDS = (
    "id",
    "score_path",
    "audio_path",
    "stem_path",
    "status",
    "alignment_score",
    "decision",
)


class StatusTransitionError(ValueError):
    """Requested status change violates the allowed transitions."""


class UnknownRecordError(KeyError):
    """Record id not present in the manifest."""


@dataclass
class PerformanceRecord:
    id: str
    score_path: str
    audio_path: str
    stem_path: str
    status: str = "pending"
    alignment_score: float | None = None
    decision: dict | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.alignment_score is not None and not 0.0 <= self.alignment_score <= 1.0:
            raise ValueError("alignment_score must lie in [0, 1]")

    def advance(self, new_status: str):
        if new_status not in STATUSES:
            raise ValueError(f"unknown status {new_status!r}")
        if new_status not in _TRANSITIONS[self.status]:
            raise StatusTransitionError(
                f"record {self.id!r}: cannot move {self.status} -> {new_status}"
            )
        self.status = new_status

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "score_path": self.score_path,
            "audio_path": self.audio_path,
            "stem_path": self.stem_path,
            "status": self.status,
            "alignment_score": self.alignment_score,
            "decision": self.decision,
        }
        for key in sorted(self.extra):
            out[key] = self.extra[key]
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "PerformanceRecord":
        extra = {k: v for k, v in raw.items() if k not in _KNOWN_FIELDS}
        return cls(
            id=raw["id"],
            score_path=raw["score_path"],
            audio_path=raw["audio_path"],
            stem_path=raw["stem_path"],
            status=raw.get("status", "pending"),
            alignment_score=raw.get("alignment_score"),
            decision=raw.get("decision"),
            extra=extra,
        )


def load_manifest(path: str | Path) -> list[PerformanceRecord]:
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, list):
        raise ValueError(f"{path}: manifest must be a JSON array")
    records = [PerformanceRecord.from_dict(item) for item in raw]
    seen = set()
    for record in records:
        if record.id in seen:
            raise ValueError(f"{path}: duplicate record id {record.id!r}")
        seen.add(record.id)
    return records


def save_manifest(path: str | Path, records: list[PerformanceRecord]):
    seen = set()
    for record in records:
        if record.id in seen:
            raise ValueError(f"duplicate record id {record.id!r}")
        seen.add(record.id)
    path = Path(path)
    text = json.dumps([r.to_dict() for r in records], indent=2) + "\n"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def find_record(records: list[PerformanceRecord], record_id: str) -> PerformanceRecord:
    for record in records:
        if record.id == record_id:
            return record
    raise UnknownRecordError(record_id)


def record_decision(
    records: list[PerformanceRecord],
    record_id: str,
    decision: str,
    by: str = "reviewer",
    note: str = "",
) -> PerformanceRecord:
    """Accept or reject an aligned record, stamping reviewer metadata."""
    if decision not in ("accept", "reject"):
        raise ValueError(f"decision must be 'accept' or 'reject', got {decision!r}")
    record = find_record(records, record_id)
    record.advance("accepted" if decision == "accept" else "rejected")
    record.decision = {
        "by": by,
        "at": datetime.now(timezone.utc).isoformat(),
        "note": note,
    }
    return record
