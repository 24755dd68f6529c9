"""Score-to-audio synchronization: chroma on both sides, DTW, then vocal
note onsets/offsets mapped through the warping path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features.audio import AudioBuffer
from ..score.types import EmptyScoreError, NoteEvent, ScoreDocument
from .chroma import (
    DEFAULT_GRID_SECONDS,
    DEFAULT_TEMPO_QPM,
    audio_to_chroma,
    chroma_cost_matrix,
    quarters_to_seconds,
    score_to_chroma,
)
from .dtw import WarpingPath, dtw


@dataclass(frozen=True)
class AlignedNote:
    note: NoteEvent
    onset_seconds: float
    offset_seconds: float

    def __post_init__(self):
        if self.onset_seconds < 0 or self.offset_seconds <= self.onset_seconds:
            raise ValueError(
                f"need offset > onset >= 0, got [{self.onset_seconds}, {self.offset_seconds}]"
            )


@dataclass(frozen=True)
class AlignmentResult:
    notes: tuple[AlignedNote, ...]
    path: WarpingPath
    grid_seconds: float

    @property
    def mean_path_cost(self) -> float:
        # weights along any full path sum to 2(I-1)+extras; normalize by pairs
        return self.path.total_cost / len(self.path.pairs)


def _map_through_path(path: WarpingPath, grid: float):
    matched = path.first_match()
    score_idx = np.array(sorted(matched), dtype=np.float64)
    audio_idx = np.array([matched[int(i)] for i in score_idx], dtype=np.float64)

    def to_audio_seconds(score_seconds: float) -> float:
        pos = score_seconds / grid
        return float(np.interp(pos, score_idx, audio_idx)) * grid

    return to_audio_seconds


def align_score_to_audio(
    score: ScoreDocument,
    audio: AudioBuffer,
    grid_seconds: float = DEFAULT_GRID_SECONDS,
) -> list[AlignedNote]:
    return align_with_details(score, audio, grid_seconds).notes  # type: ignore[return-value]


def align_with_details(
    score: ScoreDocument,
    audio: AudioBuffer,
    grid_seconds: float = DEFAULT_GRID_SECONDS,
) -> AlignmentResult:
    vocal = score.vocal_notes()
    if not vocal:
        raise EmptyScoreError("score has no vocal notes to align")
    s_chroma = score_to_chroma(score, grid_seconds)
    a_chroma = audio_to_chroma(audio, grid_seconds)
    path = dtw(chroma_cost_matrix(s_chroma, a_chroma))
    mapper = _map_through_path(path, grid_seconds)

    tempo = score.tempo_hint if score.tempo_hint else DEFAULT_TEMPO_QPM
    aligned = []
    last_onset = 0.0
    for note in vocal:
        onset = mapper(quarters_to_seconds(note.onset, tempo))
        offset = mapper(quarters_to_seconds(note.onset + note.duration, tempo))
        onset = max(onset, last_onset)  # path mapping is monotone; guard float dust
        offset = max(offset, onset + grid_seconds / 2)
        aligned.append(AlignedNote(note=note, onset_seconds=onset, offset_seconds=offset))
        last_onset = onset
    return AlignmentResult(notes=tuple(aligned), path=path, grid_seconds=grid_seconds)


def aligned_notes_to_json(aligned: list[AlignedNote]) -> list[dict]:
    return [
        {
            "index": i,
            "pitch": a.note.pitch,
            "part": a.note.part_id,
            "score_onset": a.note.onset,
            "score_duration": a.note.duration,
            "onset_seconds": round(a.onset_seconds, 6),
            "offset_seconds": round(a.offset_seconds, 6),
        }
        for i, a in enumerate(aligned)
    ]


def aligned_notes_from_json(rows: list[dict], notes: list[NoteEvent]) -> list[AlignedNote]:
    """Rebuild AlignedNotes against the score's vocal notes by index."""
    out = []
    for row in rows:
        note = notes[row["index"]]
        out.append(
            AlignedNote(
                note=note,
                onset_seconds=float(row["onset_seconds"]),
                offset_seconds=float(row["offset_seconds"]),
            )
        )
    return out
