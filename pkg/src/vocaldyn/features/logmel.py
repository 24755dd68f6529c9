"""STFT framing and log-compressed Mel spectra."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer
from .matrix import KIND_LOG_MEL, FeatureMatrix

LOG_FLOOR = 1e-10
DEFAULT_RATE = 44100


@dataclass
class LogMelConfig:
    n_fft: int = 2048
    n_mels: int = 128
    hop_seconds: float = 0.0058
    sample_rate: int = DEFAULT_RATE

    @property
    def hop_samples(self) -> int:
        return max(1, int(round(self.hop_seconds * self.sample_rate)))


def frame_signal(samples: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    """Center frames at t*hop: reflect padding at the start, zeros at the end.

    Zero end-padding keeps existing frames bit-identical when trailing
    silence is appended to the signal.
    """
    half = n_fft // 2
    n = len(samples)
    n_frames = 1 + n // hop
    if n >= 2:
        head = samples[1: half + 1][::-1]
        if len(head) < half:
            head = np.pad(head, (half - len(head), 0))
    else:
        head = np.zeros(half)
    tail_len = (n_frames - 1) * hop + n_fft - half - n
    padded = np.concatenate([head, samples, np.zeros(max(0, tail_len))])
    idx = np.arange(n_frames)[:, None] * hop + np.arange(n_fft)[None, :]
    return padded[idx]


def stft_power(samples: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    """Power spectrogram (frames x n_fft//2+1) with a periodic cosine taper."""
    window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n_fft) / n_fft)
    frames = frame_signal(samples, n_fft, hop)
    spec = np.fft.rfft(frames * window, axis=1)
    return np.abs(spec) ** 2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filter_centers(n_mels: int, sample_rate: int) -> np.ndarray:
    """Center frequencies (Hz) of the triangular filters."""
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2), n_mels + 2))
    return edges[1:-1]


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """(n_mels x n_bins) peak-one triangular filters on the Mel scale."""
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2), n_mels + 2))
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    fb = np.zeros((n_mels, len(freqs)))
    for k in range(n_mels):
        lo, center, hi = edges[k], edges[k + 1], edges[k + 2]
        rising = (freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - freqs) / max(hi - center, 1e-12)
        fb[k] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return fb


def log_mel(audio: AudioBuffer, config: LogMelConfig | None = None) -> FeatureMatrix:
    """Magnitude STFT -> triangular Mel filterbank -> natural log with a
    1e-10 floor. Audio must already be at the configured rate."""
    config = config or LogMelConfig()
    audio.require_rate(config.sample_rate, "log-Mel extraction")
    if len(audio.samples) < config.n_fft:
        warnings.warn(
            f"audio shorter than one {config.n_fft}-sample window; frames are padded",
            stacklevel=2,
        )
    power = stft_power(audio.samples, config.n_fft, config.hop_samples)
    fb = mel_filterbank(config.n_mels, config.n_fft, config.sample_rate)
    mel = power @ fb.T
    values = np.log(np.maximum(mel, LOG_FLOOR))
    return FeatureMatrix(
        values=values,
        hop_seconds=config.hop_samples / config.sample_rate,
        kind=KIND_LOG_MEL,
        source_sample_rate=config.sample_rate,
    )
