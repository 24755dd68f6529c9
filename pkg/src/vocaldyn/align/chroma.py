"""Pitch-class (chroma) features for score and audio synchronization.

Both sides share the grid spacing so their frames are directly comparable
in the DTW cost matrix. Frames are L2-normalized to unit length, except
genuinely silent frames which stay exactly all-zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features.audio import AudioBuffer, resample
from ..features.logmel import frame_signal
from ..score.types import EmptyScoreError, ScoreDocument

DEFAULT_GRID_SECONDS = 0.05
DEFAULT_TEMPO_QPM = 120.0

_AUDIO_RATE = 22050
_AUDIO_NFFT = 4096
_FMIN = 55.0
_FMAX = 5000.0


@dataclass(frozen=True)
class ChromaMatrix:
    values: np.ndarray  # frames x 12
    hop_seconds: float
    origin: str  # "score" | "audio"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != 12:
            raise ValueError("chroma values must be frames x 12")
        object.__setattr__(self, "values", vals)
        if self.hop_seconds <= 0:
            raise ValueError("hop_seconds must be positive")
        if self.origin not in ("score", "audio"):
            raise ValueError(f"origin must be 'score' or 'audio', got {self.origin!r}")

    @property
    def frames(self) -> int:
        return self.values.shape[0]


def _normalize_frames(values: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(values, axis=1)
    silent = norms < 1e-9
    safe = np.where(silent, 1.0, norms)
    out = values / safe[:, None]
    out[silent] = 0.0
    return out


def quarters_to_seconds(quarters: float, tempo_qpm: float) -> float:
    return quarters * 60.0 / tempo_qpm


def score_to_chroma(score: ScoreDocument, grid_seconds: float = DEFAULT_GRID_SECONDS) -> ChromaMatrix:
    """Weight-1 pitch-class activations from every part, sampled at frame
    start times on the grid."""
    notes = score.all_notes()
    if not notes:
        raise EmptyScoreError("score has no notes to project onto a chroma grid")
    tempo = score.tempo_hint if score.tempo_hint else DEFAULT_TEMPO_QPM
    total = max(quarters_to_seconds(n.onset + n.duration, tempo) for n in notes)
    n_frames = max(1, int(np.ceil(total / grid_seconds)))
    values = np.zeros((n_frames, 12))
    for note in notes:
        start = quarters_to_seconds(note.onset, tempo)
        end = quarters_to_seconds(note.onset + note.duration, tempo)
        first = int(np.ceil(start / grid_seconds - 1e-9))
        last = int(np.ceil(end / grid_seconds - 1e-9))  # half-open [start, end)
        values[first:last, note.pitch % 12] += 1.0
    return ChromaMatrix(values=_normalize_frames(values), hop_seconds=grid_seconds, origin="score")


def audio_to_chroma(audio: AudioBuffer, grid_seconds: float = DEFAULT_GRID_SECONDS) -> ChromaMatrix:
    """STFT magnitudes folded onto pitch classes by nearest equal-tempered
    semitone (A440), then log(1 + 10x) compression."""
    if len(audio.samples) == 0:
        raise ValueError("audio is empty")
    if audio.sample_rate != _AUDIO_RATE:
        audio = resample(audio, _AUDIO_RATE)
    hop = max(1, round(grid_seconds * _AUDIO_RATE))
    frames = frame_signal(audio.samples, _AUDIO_NFFT, hop)
    window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(_AUDIO_NFFT) / _AUDIO_NFFT)
    mags = np.abs(np.fft.rfft(frames * window, axis=1))

    freqs = np.fft.rfftfreq(_AUDIO_NFFT, 1.0 / _AUDIO_RATE)
    usable = (freqs >= _FMIN) & (freqs <= _FMAX)
    semitone = np.round(12.0 * np.log2(freqs[usable] / 440.0)).astype(int)
    pitch_class = (semitone + 9) % 12  # A440 is pitch class 9, C is 0

    folded = np.zeros((mags.shape[0], 12))
    for pc in range(12):
        cols = np.flatnonzero(pitch_class == pc)
        if cols.size:
            folded[:, pc] = mags[:, usable][:, cols].sum(axis=1)
    compressed = np.log1p(10.0 * folded)
    return ChromaMatrix(values=_normalize_frames(compressed), hop_seconds=grid_seconds, origin="audio")


def chroma_cost_matrix(score_chroma: ChromaMatrix, audio_chroma: ChromaMatrix) -> np.ndarray:
    """1 - cosine similarity; an all-zero frame costs 1 against any non-zero
    frame and 0 against another all-zero frame."""
    s = score_chroma.values
    a = audio_chroma.values
    cost = 1.0 - s @ a.T  # frames are unit or zero, so the dot is the cosine
    s_zero = np.linalg.norm(s, axis=1) < 1e-9
    a_zero = np.linalg.norm(a, axis=1) < 1e-9
    both = np.logical_and(s_zero[:, None], a_zero[None, :])
    cost[both] = 0.0
    return np.clip(cost, 0.0, 2.0)
