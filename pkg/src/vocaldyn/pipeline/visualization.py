"""Review bundle: everything the browser needs to draw one performance.

Three linked layers — f0 dots over note rectangles, a waveform envelope,
and held-dynamics regions — plus the audio duration for a shared time axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..align import pitch_to_hz
from ..features.audio import load_wav
from .manifest import STATUS_RANK, PerformanceRecord
from .stages import artifact_dir


@dataclass(frozen=True)
class VisualizationBundle:
    duration_seconds: float
    f0: list = field(default_factory=list)  # [time, hz] voiced points
    notes: list = field(default_factory=list)  # {onset, offset, pitch, pitch_hz}
    envelope: list = field(default_factory=list)  # [min, max] per bucket
    regions: list = field(default_factory=list)  # {start, end, category, region}

    def __post_init__(self):
        d = self.duration_seconds
        for t, _ in self.f0:
            if not 0.0 <= t <= d:
                raise ValueError(f"f0 time {t} outside audio duration {d}")
        for n in self.notes:
            if not 0.0 <= n["onset"] <= n["offset"] <= d:
                raise ValueError(f"note [{n['onset']}, {n['offset']}] outside duration {d}")
        previous_end = 0.0
        for r in self.regions:
            if r["start"] < previous_end - 1e-9 or r["end"] > d + 1e-9:
                raise ValueError("dynamics regions must be ordered and non-overlapping")
            previous_end = r["end"]

    def to_json(self) -> dict:
        return {
            "duration_seconds": self.duration_seconds,
            "f0": self.f0,
            "notes": self.notes,
            "envelope": self.envelope,
            "regions": self.regions,
        }


def waveform_envelope(samples: np.ndarray, width: int) -> list:
    """Min/max pairs over exactly `width` equal sample buckets."""
    if width <= 0:
        raise ValueError("width must be positive")
    n = len(samples)
    pairs = []
    for k in range(width):
        lo, hi = k * n // width, (k + 1) * n // width
        if hi <= lo:  # more buckets than samples
            pairs.append([0.0, 0.0])
        else:
            chunk = samples[lo:hi]
            pairs.append([round(float(chunk.min()), 5), round(float(chunk.max()), 5)])
    return pairs


def dynamics_regions(spans: list[dict], duration: float) -> list[dict]:
    """Merge per-note spans into non-overlapping display regions.

    Consecutive spans with the same category and wedge flag coalesce; when a
    new dynamic begins before the previous note ends, the newer marking wins
    and the earlier region is clipped at the new onset.
    """
    regions: list[dict] = []
    for span in sorted(spans, key=lambda s: s["onset_seconds"]):
        start = min(max(span["onset_seconds"], 0.0), duration)
        end = min(max(span["offset_seconds"], 0.0), duration)
        same = (
            regions
            and regions[-1]["category"] == span["category"]
            and regions[-1]["region"] == span["region"]
            and start <= regions[-1]["end"] + 1e-9
        )
        if same:
            regions[-1]["end"] = max(regions[-1]["end"], end)
            continue
        if regions and regions[-1]["end"] > start:
            regions[-1]["end"] = start
        regions.append(
            {"start": start, "end": end, "category": span["category"], "region": span["region"]}
        )
    return [r for r in regions if r["end"] > r["start"] + 1e-12]


def build_visualization(
    record: PerformanceRecord, workspace: str | Path, width: int = 800
) -> VisualizationBundle:
    if STATUS_RANK[record.status] < STATUS_RANK["aligned"]:
        raise ValueError(
            f"record {record.id!r} has status {record.status!r}; align it before review"
        )
    workspace = Path(workspace)
    out = artifact_dir(workspace, record.id)
    for name in ("aligned.json", "f0.json", "dynamics.json"):
        if not (out / name).exists():
            raise FileNotFoundError(f"record {record.id!r}: missing artifact {name}")
    stem_path = Path(record.stem_path)
    if not stem_path.is_absolute():
        stem_path = workspace / stem_path
    stem = load_wav(stem_path)
    duration = stem.duration

    raw_f0 = json.loads((out / "f0.json").read_text())
    hop = raw_f0["hop_seconds"]
    points = [
        [round(k * hop, 6), freq]
        for k, freq in enumerate(raw_f0["frequencies"])
        if freq > 0 and k * hop <= duration
    ]
    notes = [
        {
            "onset": row["onset_seconds"],
            "offset": min(row["offset_seconds"], duration),
            "pitch": row["pitch"],
            "pitch_hz": round(pitch_to_hz(row["pitch"]), 4),
        }
        for row in json.loads((out / "aligned.json").read_text())
        if row["onset_seconds"] < duration
    ]
    spans = json.loads((out / "dynamics.json").read_text())
    return VisualizationBundle(
        duration_seconds=duration,
        f0=points,
        notes=notes,
        envelope=waveform_envelope(stem.samples, width),
        regions=dynamics_regions(spans, duration),
    )
