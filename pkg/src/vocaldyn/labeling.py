"""Frame-wise dynamics targets: note labels projected onto feature frames.

Frames whose center falls inside an aligned note get the note's class;
everything else (rests, breaths) is masked out rather than given a silence
class, so the ten levels keep their meaning. The DYNL binary file mirrors
the DYNF feature format.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .align.aligner import AlignedNote
from .score.types import DynamicCategory, NoteDynamicLabel

MAGIC = b"DYNL"
FORMAT_VERSION = 1

NUM_CLASSES = 10
MASKED_SENTINEL = 255

# Ordered soft-to-loud; index in this tuple is the class.
CLASS_CATEGORIES = (
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
_CATEGORY_CLASS = {category: idx for idx, category in enumerate(CLASS_CATEGORIES)}


class UnresolvedCategoryError(ValueError):
    """A non-absolute category (sf or a wedge) reached class conversion."""


@dataclass
class FrameLabelSequence:
    """Per-frame class indices with a validity mask.

    class_index is uint8; masked-out frames hold MASKED_SENTINEL and never
    enter loss or metrics.
    """

    class_index: np.ndarray
    mask: np.ndarray
    hop_seconds: float

    def __post_init__(self):
        self.class_index = np.asarray(self.class_index, dtype=np.uint8)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.class_index.ndim != 1 or self.mask.shape != self.class_index.shape:
            raise ValueError("class_index and mask must be equal-length vectors")
        if self.hop_seconds <= 0:
            raise ValueError("hop_seconds must be positive")
        if (self.class_index[self.mask] >= NUM_CLASSES).any():
            raise ValueError(f"masked-in classes must lie in 0..{NUM_CLASSES - 1}")
        if not (self.class_index[~self.mask] == MASKED_SENTINEL).all():
            raise ValueError("masked-out frames must hold the sentinel class")

    @property
    def frames(self) -> int:
        return len(self.class_index)

    @property
    def masked_in_count(self) -> int:
        return int(self.mask.sum())

    def frame_times(self) -> np.ndarray:
        return np.arange(self.frames) * self.hop_seconds


def category_to_class(category: DynamicCategory) -> int:
    """pppp -> 0 ... ffff -> 9; order-preserving over the ten levels."""
    try:
        return _CATEGORY_CLASS[category]
    except KeyError:
        raise UnresolvedCategoryError(
            f"{category.value!r} has no class; resolve sf and wedges first"
        ) from None


def class_to_category(class_index: int) -> DynamicCategory:
    if not 0 <= class_index < NUM_CLASSES:
        raise ValueError(f"class index must lie in 0..{NUM_CLASSES - 1}, got {class_index}")
    return CLASS_CATEGORIES[class_index]


def frames_from_alignment(
    aligned: list[AlignedNote],
    labels: list[NoteDynamicLabel],
    hop_seconds: float,
    total_frames: int,
) -> FrameLabelSequence:
    """Project note classes onto the frame grid.

    Frame k is centered at k * hop (matching the feature framing); it takes
    the class of the note whose [onset, offset) contains that center. Where
    notes overlap, the later onset wins. Frames inside no note are masked.
    """
    if hop_seconds <= 0:
        raise ValueError("hop_seconds must be positive")
    if total_frames < 0:
        raise ValueError("total_frames must be non-negative")
    if len(aligned) != len(labels):
        raise ValueError(f"{len(aligned)} aligned notes but {len(labels)} labels")
    for a, lab in zip(aligned, labels):
        if a.note is not lab.note and a.note != lab.note:
            raise ValueError("aligned notes and labels must refer to the same notes")

    class_index = np.full(total_frames, MASKED_SENTINEL, dtype=np.uint8)
    order = sorted(range(len(aligned)), key=lambda i: aligned[i].onset_seconds)
    for i in order:
        cls = category_to_class(labels[i].category)
        first = int(np.ceil(aligned[i].onset_seconds / hop_seconds - 1e-9))
        last = int(np.ceil(aligned[i].offset_seconds / hop_seconds - 1e-9))
        first = max(first, 0)
        class_index[first: min(last, total_frames)] = cls
    return FrameLabelSequence(
        class_index=class_index,
        mask=class_index != MASKED_SENTINEL,
        hop_seconds=hop_seconds,
    )


def label_spans_to_json(
    aligned: list[AlignedNote], labels: list[NoteDynamicLabel]
) -> list[dict]:
    """Per-note dynamics regions for the review UI: category names plus any
    crescendo/diminuendo region flag (the flag never alters the class)."""
    if len(aligned) != len(labels):
        raise ValueError(f"{len(aligned)} aligned notes but {len(labels)} labels")
    return [
        {
            "onset_seconds": round(a.onset_seconds, 6),
            "offset_seconds": round(a.offset_seconds, 6),
            "category": lab.category.value,
            "class_index": category_to_class(lab.category),
            "region": lab.region.value if lab.region is not None else None,
        }
        for a, lab in zip(aligned, labels)
    ]


def frame_labels_to_json(seq: FrameLabelSequence) -> dict:
    """Frame classes for the review UI; masked frames serialize as null."""
    return {
        "hop_seconds": seq.hop_seconds,
        "classes": [int(c) if m else None for c, m in zip(seq.class_index, seq.mask)],
    }


_HEADER = struct.Struct("<4sIId")


def save_dynl(path: str | Path, seq: FrameLabelSequence):
    """DYNL layout: magic, version u32, frames u32, hop_seconds f64, then one
    class u8 per frame (255 = masked)."""
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, seq.frames, seq.hop_seconds)
    tmp = Path(path).with_name(Path(path).name + ".tmp")
    tmp.write_bytes(header + seq.class_index.tobytes())
    tmp.replace(path)


def load_dynl(path: str | Path) -> FrameLabelSequence:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a DYNL label file")
    magic, version, frames, hop = _HEADER.unpack_from(raw)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported DYNL version {version}")
    body = raw[_HEADER.size:]
    if len(body) != frames:
        raise ValueError(f"{path}: truncated payload ({len(body)} != {frames} bytes)")
    class_index = np.frombuffer(body, dtype=np.uint8).copy()
    return FrameLabelSequence(
        class_index=class_index,
        mask=class_index != MASKED_SENTINEL,
        hop_seconds=hop,
    )
