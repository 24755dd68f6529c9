"""Note-level dynamics propagation and corpus filtering rules."""

from __future__ import annotations

import bisect
from collections import Counter

from .types import (
    REQUIRED_PARTS,
    DynamicCategory,
    DynamicMarking,
    EmptyScoreError,
    NoteDynamicLabel,
    ScoreDocument,
    UnlabeledPrefixError,
)


def score_passes_filter(score: ScoreDocument) -> bool:
    """Corpus filter: more than 3 dynamic markings, and exactly the
    vocal / piano_lh / piano_rh part layout."""
    return len(score.markings) > 3 and set(score.parts) == set(REQUIRED_PARTS)


def propagate_note_dynamics(
    score: ScoreDocument,
    on_unlabeled: str = "error",
    marking_parts: set[str] | None = None,
) -> list[NoteDynamicLabel]:
    """Resolve each vocal note's dynamic from the score markings.

    A note holds the most recent absolute marking at or before its onset.
    A note carrying an sf marking keeps sf, and the held value resumes on
    the next note. Notes inside a crescendo/diminuendo span keep the held
    value plus a region flag.

    on_unlabeled: "error" raises UnlabeledPrefixError for notes preceding
    the first absolute marking; "drop" silently skips them.
    """
    if on_unlabeled not in ("error", "drop"):
        raise ValueError(f"on_unlabeled must be 'error' or 'drop', got {on_unlabeled!r}")
    notes = score.vocal_notes()
    if not notes:
        raise EmptyScoreError("score has no vocal notes to label")

    markings = [
        m for m in score.markings
        if marking_parts is None or m.part_id in marking_parts
    ]
    absolute = [m for m in markings if m.category.is_absolute]
    abs_offsets = [m.offset for m in absolute]
    wedges = [m for m in markings if m.category.is_wedge]
    sf_offsets = sorted(m.offset for m in markings if m.category is DynamicCategory.SF)

    # Each sf marking attaches to the first note at or after its offset.
    sf_notes: set[int] = set()
    ni = 0
    for off in sf_offsets:
        while ni < len(notes) and notes[ni].onset < off - 1e-9:
            ni += 1
        if ni < len(notes):
            sf_notes.add(ni)
            ni += 1

    labels: list[NoteDynamicLabel] = []
    unlabeled = []
    for i, note in enumerate(notes):
        k = bisect.bisect_right(abs_offsets, note.onset + 1e-9)
        held = absolute[k - 1].category if k > 0 else None
        if i in sf_notes:
            category = DynamicCategory.SF
        elif held is None:
            unlabeled.append(note)
            continue
        else:
            category = held
        region = _covering_wedge(wedges, note.onset)
        labels.append(NoteDynamicLabel(note=note, category=category, region=region))

    if unlabeled and on_unlabeled == "error":
        raise UnlabeledPrefixError(unlabeled)
    return labels


def resolve_sf(labels: list[NoteDynamicLabel]) -> list[NoteDynamicLabel]:
    """Replace sf categories with the held absolute value so every label is
    one of the ten levels.

    The held value is the nearest preceding label's absolute category — the
    dynamic the accent momentarily interrupts. An sf before any absolute
    marking has nothing to resume and raises UnlabeledPrefixError.
    """
    resolved: list[NoteDynamicLabel] = []
    held: DynamicCategory | None = None
    orphans = []
    for label in labels:
        if label.category is DynamicCategory.SF:
            if held is None:
                orphans.append(label.note)
                continue
            label = NoteDynamicLabel(note=label.note, category=held, region=label.region)
        else:
            held = label.category
        resolved.append(label)
    if orphans:
        raise UnlabeledPrefixError(orphans)
    return resolved


def _covering_wedge(wedges: list[DynamicMarking], onset: float) -> DynamicCategory | None:
    covering = [w for w in wedges if w.offset - 1e-9 <= onset < w.span_end - 1e-9]
    if not covering:
        return None
    # Latest-starting span wins when wedges overlap.
    return max(covering, key=lambda w: w.offset).category


def corpus_marking_statistics(scores: list[ScoreDocument]) -> dict[DynamicCategory, int]:
    """Total marking counts per category across a corpus; every category key
    is present even when its count is zero."""
    counts = Counter(m.category for score in scores for m in score.markings)
    return {category: counts.get(category, 0) for category in DynamicCategory}
