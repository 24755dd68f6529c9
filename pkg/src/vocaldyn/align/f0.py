"""Fundamental-frequency tracking and alignment validation.

The built-in tracker is the cumulative-mean-normalized difference method
(YIN); externally computed tracks can be ingested from CSV rows instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..features.audio import AudioBuffer

HOP_SECONDS = 0.01
THRESHOLD = 0.15
FMIN_HZ = 50.0
FMAX_HZ = 1500.0

_WINDOW = 1024
_CHUNK = 1024  # frames per FFT batch


class UndefinedScoreError(ValueError):
    """validate_alignment has no voiced frames inside any note to judge."""


@dataclass(frozen=True)
class F0Track:
    frequencies: np.ndarray  # Hz, 0 = unvoiced
    confidence: np.ndarray
    hop_seconds: float = HOP_SECONDS

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        c = np.asarray(self.confidence, dtype=np.float64)
        if f.shape != c.shape or f.ndim != 1:
            raise ValueError("frequencies and confidence must be matching 1-d arrays")
        if (f < 0).any():
            raise ValueError("f0 must be non-negative")
        voiced = f > 0
        if voiced.any() and ((f[voiced] < FMIN_HZ) | (f[voiced] > FMAX_HZ)).any():
            raise ValueError(f"voiced f0 must lie within [{FMIN_HZ}, {FMAX_HZ}] Hz")
        if ((c < 0) | (c > 1)).any():
            raise ValueError("confidence must lie in [0, 1]")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "confidence", c)

    @property
    def frames(self) -> int:
        return len(self.frequencies)

    @property
    def frame_times(self) -> np.ndarray:
        return np.arange(self.frames) * self.hop_seconds


def _difference_functions(frames: np.ndarray, window: int, tau_max: int) -> np.ndarray:
    """d(tau) for tau = 0..tau_max over a (F, window+tau_max) frame block."""
    frame_len = frames.shape[1]
    nfft = 1 << int(np.ceil(np.log2(frame_len + window)))
    spec_full = np.fft.rfft(frames, nfft, axis=1)
    spec_head = np.fft.rfft(frames[:, :window], nfft, axis=1)
    corr = np.fft.irfft(spec_full * np.conj(spec_head), nfft, axis=1)[:, : tau_max + 1]
    sq = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames**2, axis=1)], axis=1)
    head_energy = sq[:, window : window + 1]
    shift_energy = sq[:, np.arange(tau_max + 1) + window] - sq[:, : tau_max + 1]
    return np.maximum(head_energy + shift_energy - 2.0 * corr, 0.0)


def _cmndf(diff: np.ndarray) -> np.ndarray:
    tau = np.arange(1, diff.shape[1])
    running = np.cumsum(diff[:, 1:], axis=1)
    out = np.ones_like(diff)
    np.divide(diff[:, 1:] * tau, running, out=out[:, 1:], where=running > 0)
    return out


def extract_f0(audio: AudioBuffer) -> F0Track:
    sr = audio.sample_rate
    hop = max(1, round(HOP_SECONDS * sr))
    tau_max = int(sr / FMIN_HZ)
    tau_min = max(2, int(sr / FMAX_HZ))
    frame_len = _WINDOW + tau_max

    samples = audio.samples
    if len(samples) < frame_len:
        samples = np.concatenate([samples, np.zeros(frame_len - len(samples))])
    n_frames = 1 + (len(samples) - frame_len) // hop

    freqs = np.zeros(n_frames)
    conf = np.zeros(n_frames)
    for start in range(0, n_frames, _CHUNK):
        block = np.stack(
            [samples[k * hop : k * hop + frame_len] for k in range(start, min(start + _CHUNK, n_frames))]
        )
        d = _difference_functions(block, _WINDOW, tau_max)
        dp = _cmndf(d)
        for b in range(dp.shape[0]):
            row = dp[b]
            conf[start + b] = float(np.clip(1.0 - row[tau_min:].min(), 0.0, 1.0))
            below = np.flatnonzero(row[tau_min:] < THRESHOLD)
            if below.size == 0:
                continue
            tau = tau_min + below[0]
            while tau + 1 < len(row) and row[tau + 1] < row[tau]:
                tau += 1
            # parabolic refinement around the local minimum
            if 1 <= tau < len(row) - 1:
                denom = row[tau - 1] - 2.0 * row[tau] + row[tau + 1]
                if denom > 0:
                    tau = tau + 0.5 * (row[tau - 1] - row[tau + 1]) / denom
            f0 = sr / tau
            if FMIN_HZ <= f0 <= FMAX_HZ:
                freqs[start + b] = f0
    return F0Track(frequencies=freqs, confidence=conf, hop_seconds=hop / sr)


def ingest_f0_csv(rows: Iterable[tuple[float, float, float]]) -> F0Track:
    """Nearest-neighbor resample of (time, frequency, confidence) rows onto
    the uniform 10 ms grid."""
    data = [(float(t), float(f), float(c)) for t, f, c in rows]
    if not data:
        raise ValueError("no f0 rows")
    times = np.array([r[0] for r in data])
    if (np.diff(times) < 0).any():
        raise ValueError("f0 rows must be time-sorted")
    freqs = np.array([r[1] for r in data])
    if (freqs < 0).any():
        raise ValueError("f0 must be non-negative")
    confs = np.clip([r[2] for r in data], 0.0, 1.0)

    n_frames = int(np.floor(times[-1] / HOP_SECONDS + 1e-9)) + 1
    grid = np.arange(n_frames) * HOP_SECONDS
    right = np.searchsorted(times, grid)
    left = np.clip(right - 1, 0, len(times) - 1)
    right = np.clip(right, 0, len(times) - 1)
    pick_right = np.abs(times[right] - grid) < np.abs(grid - times[left])
    idx = np.where(pick_right, right, left)

    out_f = freqs[idx]
    out_f[(out_f > 0) & ((out_f < FMIN_HZ) | (out_f > FMAX_HZ))] = 0.0
    return F0Track(frequencies=out_f, confidence=confs[idx], hop_seconds=HOP_SECONDS)


def pitch_to_hz(pitch: int) -> float:
    return 440.0 * 2.0 ** ((pitch - 69) / 12.0)


def validate_alignment(aligned: Sequence, f0: F0Track) -> float:
    """Fraction of voiced frames inside aligned notes whose f0 matches the
    note within +-100 cents, octave errors forgiven."""
    if not aligned or f0.frames == 0:
        raise ValueError("empty alignment or f0 track")
    times = f0.frame_times
    voiced = f0.frequencies > 0
    hits = 0
    total = 0
    for k in np.flatnonzero(voiced):
        t = times[k]
        covering = [a for a in aligned if a.onset_seconds <= t < a.offset_seconds]
        if not covering:
            continue
        total += 1
        for a in covering:
            cents = 1200.0 * np.log2(f0.frequencies[k] / pitch_to_hz(a.note.pitch))
            folded = (cents + 600.0) % 1200.0 - 600.0
            if abs(folded) <= 100.0:
                hits += 1
                break
    if total == 0:
        raise UndefinedScoreError("no voiced f0 frames fall inside any aligned note")
    return hits / total


__all__ = [
    "F0Track",
    "UndefinedScoreError",
    "extract_f0",
    "ingest_f0_csv",
    "pitch_to_hz",
    "validate_alignment",
    "HOP_SECONDS",
    "THRESHOLD",
    "FMIN_HZ",
    "FMAX_HZ",
]
