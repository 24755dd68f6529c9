"""Core score domain types and their JSON serialization."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field


VOCAL = "vocal"
PIANO_LH = "piano_lh"
PIANO_RH = "piano_rh"
REQUIRED_PARTS = frozenset({VOCAL, PIANO_LH, PIANO_RH})


class DynamicCategory(enum.Enum):
    """The 13 dynamics categories: 10 absolute levels, sforzando, and wedges.

    Accent variants (sf, sfz, fz) are consolidated into SF.
    """

    PPPP = "pppp"
    PPP = "ppp"
    PP = "pp"
    P = "p"
    MP = "mp"
    MF = "mf"
    F = "f"
    FF = "ff"
    FFF = "fff"
    FFFF = "ffff"
    SF = "sf"
    CRESCENDO = "crescendo"
    DIMINUENDO = "diminuendo"

    @property
    def is_absolute(self) -> bool:
        return self in ABSOLUTE_CATEGORIES

    @property
    def is_wedge(self) -> bool:
        return self in (DynamicCategory.CRESCENDO, DynamicCategory.DIMINUENDO)

    def __lt__(self, other: "DynamicCategory") -> bool:
        if not (self.is_absolute and other.is_absolute):
            return NotImplemented
        return ABSOLUTE_CATEGORIES.index(self) < ABSOLUTE_CATEGORIES.index(other)


# Strict total order from softest to loudest.
ABSOLUTE_CATEGORIES = (
    DynamicCategory.PPPP,
    DynamicCategory.PPP,
    DynamicCategory.PP,
    DynamicCategory.P,
    DynamicCategory.MP,
    DynamicCategory.MF,
    DynamicCategory.F,
    DynamicCategory.FF,
    DynamicCategory.FFF,
    DynamicCategory.FFFF,
)


class ScoreError(Exception):
    """Base class for score handling errors."""


class ScoreParseError(ScoreError):
    """Malformed input document; carries a line/column position when known."""

    def __init__(self, message: str, position: tuple[int, int] | None = None):
        if position is not None:
            message = f"{message} (line {position[0]}, column {position[1]})"
        super().__init__(message)
        self.position = position


class EmptyScoreError(ScoreError):
    """Document contained no parts or no notes where required."""


class UnlabeledPrefixError(ScoreError):
    """Notes occur before the first absolute dynamic marking."""

    def __init__(self, notes: list["NoteEvent"]):
        super().__init__(
            f"{len(notes)} note(s) precede the first absolute dynamic marking; "
            "drop or default them explicitly"
        )
        self.notes = list(notes)


@dataclass(frozen=True)
class NoteEvent:
    """A pitched note: semitone number (60 = middle C), offsets in quarter notes."""

    pitch: int
    onset: float
    duration: float
    part_id: str
    measure: int

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"note duration must be > 0, got {self.duration}")
        if self.onset < 0:
            raise ValueError(f"note onset must be >= 0, got {self.onset}")
        if self.measure < 1:
            raise ValueError(f"measure must be a positive integer, got {self.measure}")


@dataclass(frozen=True)
class DynamicMarking:
    """A point dynamic or a wedge span, offsets in quarter notes.

    span_end equals offset for point markings and exceeds it only for wedges.
    """

    category: DynamicCategory
    offset: float
    part_id: str
    span_end: float = -1.0

    def __post_init__(self):
        if self.span_end < 0:
            object.__setattr__(self, "span_end", self.offset)
        if self.span_end < self.offset:
            raise ValueError("span_end must be >= offset")
        if self.span_end > self.offset and not self.category.is_wedge:
            raise ValueError("only crescendo/diminuendo markings may span")


@dataclass(frozen=True)
class ScoreMetadata:
    composer: str = ""
    title: str = ""
    catalogue_id: str = ""


@dataclass
class ScoreDocument:
    """A parsed score: notes per part, dynamic markings, metadata.

    Markings are kept sorted by offset; every marking part must exist.
    """

    parts: dict[str, list[NoteEvent]]
    markings: list[DynamicMarking]
    metadata: ScoreMetadata = field(default_factory=ScoreMetadata)
    tempo_hint: float | None = None

    def __post_init__(self):
        self.markings = sorted(self.markings, key=lambda m: m.offset)
        for m in self.markings:
            if m.part_id not in self.parts:
                raise ValueError(f"marking references unknown part {m.part_id!r}")

    def vocal_notes(self) -> list[NoteEvent]:
        return sorted(self.parts.get(VOCAL, []), key=lambda n: n.onset)

    def all_notes(self) -> list[NoteEvent]:
        out: list[NoteEvent] = []
        for notes in self.parts.values():
            out.extend(notes)
        return sorted(out, key=lambda n: n.onset)

    def to_json(self) -> str:
        doc = {
            "parts": {
                pid: [
                    {
                        "pitch": n.pitch,
                        "onset": n.onset,
                        "duration": n.duration,
                        "measure": n.measure,
                    }
                    for n in notes
                ]
                for pid, notes in self.parts.items()
            },
            "markings": [
                {
                    "category": m.category.value,
                    "offset": m.offset,
                    "part_id": m.part_id,
                    "span_end": m.span_end,
                }
                for m in self.markings
            ],
            "metadata": {
                "composer": self.metadata.composer,
                "title": self.metadata.title,
                "catalogue_id": self.metadata.catalogue_id,
            },
            "tempo_hint": self.tempo_hint,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScoreDocument":
        doc = json.loads(text)
        parts = {
            pid: [NoteEvent(part_id=pid, **n) for n in notes]
            for pid, notes in doc["parts"].items()
        }
        markings = [
            DynamicMarking(
                category=DynamicCategory(m["category"]),
                offset=m["offset"],
                part_id=m["part_id"],
                span_end=m["span_end"],
            )
            for m in doc["markings"]
        ]
        return cls(
            parts=parts,
            markings=markings,
            metadata=ScoreMetadata(**doc.get("metadata", {})),
            tempo_hint=doc.get("tempo_hint"),
        )


@dataclass(frozen=True)
class NoteDynamicLabel:
    """A note with its resolved dynamic: absolute level or sf, plus an
    optional crescendo/diminuendo region flag (wedges never become the
    category itself)."""

    note: NoteEvent
    category: DynamicCategory
    region: DynamicCategory | None = None

    def __post_init__(self):
        if self.category.is_wedge:
            raise ValueError("label category may not be a wedge")
        if self.region is not None and not self.region.is_wedge:
            raise ValueError("region flag must be crescendo or diminuendo")


def labels_to_json(labels: list[NoteDynamicLabel]) -> str:
    rows = [
        {
            "note": {
                "pitch": lab.note.pitch,
                "onset": lab.note.onset,
                "duration": lab.note.duration,
                "part_id": lab.note.part_id,
                "measure": lab.note.measure,
            },
            "category": lab.category.value,
            "region": lab.region.value if lab.region else None,
        }
        for lab in labels
    ]
    return json.dumps(rows, indent=2)
