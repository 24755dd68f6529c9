"""Score-to-performance synchronization, f0 tracking, and validation."""

from .aligner import (
    AlignedNote,
    AlignmentResult,
    align_score_to_audio,
    align_with_details,
    aligned_notes_from_json,
    aligned_notes_to_json,
)
from .chroma import (
    ChromaMatrix,
    audio_to_chroma,
    chroma_cost_matrix,
    quarters_to_seconds,
    score_to_chroma,
)
from .dtw import InfeasiblePathError, WarpingPath, dtw
from .f0 import (
    F0Track,
    UndefinedScoreError,
    extract_f0,
    ingest_f0_csv,
    pitch_to_hz,
    validate_alignment,
)

__all__ = [
    "AlignedNote",
    "AlignmentResult",
    "align_score_to_audio",
    "align_with_details",
    "aligned_notes_to_json",
    "aligned_notes_from_json",
    "ChromaMatrix",
    "score_to_chroma",
    "audio_to_chroma",
    "chroma_cost_matrix",
    "quarters_to_seconds",
    "WarpingPath",
    "InfeasiblePathError",
    "dtw",
    "F0Track",
    "UndefinedScoreError",
    "extract_f0",
    "ingest_f0_csv",
    "pitch_to_hz",
    "validate_alignment",
]
