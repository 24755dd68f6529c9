from .musicxml import parse_musicxml, parse_musicxml_file
from .propagate import (
    corpus_marking_statistics,
    propagate_note_dynamics,
    resolve_sf,
    score_passes_filter,
)
from .types import (
    ABSOLUTE_CATEGORIES,
    PIANO_LH,
    PIANO_RH,
    REQUIRED_PARTS,
    VOCAL,
    DynamicCategory,
    DynamicMarking,
    EmptyScoreError,
    NoteDynamicLabel,
    NoteEvent,
    ScoreDocument,
    ScoreMetadata,
    ScoreParseError,
    UnlabeledPrefixError,
    labels_to_json,
)

__all__ = [
    "ABSOLUTE_CATEGORIES",
    "PIANO_LH",
    "PIANO_RH",
    "REQUIRED_PARTS",
    "VOCAL",
    "DynamicCategory",
    "DynamicMarking",
    "EmptyScoreError",
    "NoteDynamicLabel",
    "NoteEvent",
    "ScoreDocument",
    "ScoreMetadata",
    "ScoreParseError",
    "UnlabeledPrefixError",
    "corpus_marking_statistics",
    "labels_to_json",
    "parse_musicxml",
    "parse_musicxml_file",
    "propagate_note_dynamics",
    "resolve_sf",
    "score_passes_filter",
]
