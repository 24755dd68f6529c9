"""Mono audio buffers, PCM wav I/O and band-limited resampling."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly


class SampleRateError(ValueError):
    """Audio arrived at a different rate than the operation requires."""


@dataclass
class AudioBuffer:
    """Mono float samples in [-1, 1] with their sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer is mono; got a multi-channel array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("audio contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def require_rate(self, rate: int, what: str = "operation"):
        if self.sample_rate != rate:
            raise SampleRateError(
                f"{what} requires {rate} Hz audio, got {self.sample_rate} Hz; "
                "resample explicitly first"
            )


def load_wav(path: str | Path) -> AudioBuffer:
    """Read a PCM wav file (16/24/32-bit int or 32/64-bit float), downmixing
    multi-channel content to mono."""
    rate, data = wavfile.read(str(path))
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    else:
        samples = data.astype(np.float64)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioBuffer(samples=samples, sample_rate=int(rate))


def save_wav(path: str | Path, audio: AudioBuffer):
    wavfile.write(str(path), audio.sample_rate, audio.samples.astype(np.float32))


def resample(audio: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Polyphase band-limited resampling; identity when rates match."""
    if target_rate <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate}")
    if target_rate == audio.sample_rate:
        return AudioBuffer(samples=audio.samples.copy(), sample_rate=audio.sample_rate)
    g = gcd(target_rate, audio.sample_rate)
    out = resample_poly(audio.samples, target_rate // g, audio.sample_rate // g)
    return AudioBuffer(samples=out, sample_rate=target_rate)
