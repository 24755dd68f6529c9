"""Feature matrices, time pooling, and the DYNF binary file format."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"DYNF"
FORMAT_VERSION = 1

KIND_LOG_MEL = "log_mel"
KIND_BARK = "bark_loudness"
KIND_CHROMA = "chroma"
_KIND_CODES = {KIND_LOG_MEL: 0, KIND_BARK: 1, KIND_CHROMA: 2}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}

BARK_BINS = 240
BARK_BIN_WIDTH = 0.1  # Bark per bin


@dataclass
class FeatureMatrix:
    """frames x bins feature values with hop metadata."""

    values: np.ndarray
    hop_seconds: float
    kind: str
    source_sample_rate: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError("feature values must be a frames x bins matrix")
        if self.hop_seconds <= 0:
            raise ValueError("hop_seconds must be positive")
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == KIND_BARK and self.values.shape[1] != BARK_BINS:
            raise ValueError(
                f"bark_loudness requires {BARK_BINS} bins, got {self.values.shape[1]}"
            )

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def bins(self) -> int:
        return self.values.shape[1]

    def frame_times(self) -> np.ndarray:
        return np.arange(self.frames) * self.hop_seconds


def total_loudness(spec: FeatureMatrix) -> np.ndarray:
    """Per-frame total loudness in sone: bin sum x 0.1 Bark."""
    if spec.kind != KIND_BARK:
        raise ValueError(f"total loudness is defined for bark_loudness, got {spec.kind!r}")
    return spec.values.astype(np.float64).sum(axis=1) * BARK_BIN_WIDTH


def downsample_time(spec: FeatureMatrix, factor: int) -> FeatureMatrix:
    """Non-overlapping mean pooling over `factor` consecutive frames.

    A trailing partial group is averaged over its actual length; the hop
    metadata is scaled by the factor.
    """
    if factor < 1:
        raise ValueError(f"downsampling factor must be >= 1, got {factor}")
    if factor == 1:
        return FeatureMatrix(
            values=spec.values.copy(),
            hop_seconds=spec.hop_seconds,
            kind=spec.kind,
            source_sample_rate=spec.source_sample_rate,
        )
    n, bins = spec.values.shape
    full = n // factor
    pooled = np.empty(((n + factor - 1) // factor, bins), dtype=np.float64)
    if full:
        pooled[:full] = (
            spec.values[: full * factor].astype(np.float64).reshape(full, factor, bins).mean(axis=1)
        )
    if full * factor < n:
        pooled[full] = spec.values[full * factor:].astype(np.float64).mean(axis=0)
    return FeatureMatrix(
        values=pooled,
        hop_seconds=spec.hop_seconds * factor,
        kind=spec.kind,
        source_sample_rate=spec.source_sample_rate,
    )


_HEADER = struct.Struct("<4sIBIIdI")


def save_dynf(path: str | Path, spec: FeatureMatrix):
    """DYNF layout: magic, version u32, kind u8, rows u32, cols u32,
    hop_seconds f64, source_rate u32, then rows x cols f32 LE row-major."""
    rows, cols = spec.values.shape
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        _KIND_CODES[spec.kind],
        rows,
        cols,
        spec.hop_seconds,
        spec.source_sample_rate,
    )
    data = np.ascontiguousarray(spec.values, dtype="<f4").tobytes()
    tmp = Path(path).with_name(Path(path).name + ".tmp")
    tmp.write_bytes(header + data)
    tmp.replace(path)


def load_dynf(path: str | Path) -> FeatureMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a DYNF feature file")
    magic, version, kind_code, rows, cols, hop, rate = _HEADER.unpack_from(raw)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported DYNF version {version}")
    if kind_code not in _CODE_KINDS:
        raise ValueError(f"{path}: unknown feature kind code {kind_code}")
    expected = rows * cols * 4
    body = raw[_HEADER.size:]
    if len(body) != expected:
        raise ValueError(f"{path}: truncated payload ({len(body)} != {expected} bytes)")
    values = np.frombuffer(body, dtype="<f4").reshape(rows, cols)
    return FeatureMatrix(
        values=values.copy(),
        hop_seconds=hop,
        kind=_CODE_KINDS[kind_code],
        source_sample_rate=rate,
    )
