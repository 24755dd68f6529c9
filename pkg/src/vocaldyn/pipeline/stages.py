"""Stage runners: feature extraction, alignment, labeling, and export.

Each stage reads its inputs fresh, writes artifacts with atomic renames,
and only advances the record's status when run from the exact prerequisite
state — re-running a completed stage rewrites identical artifacts and
leaves the status alone.
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import numpy as np

from ..align import (
    UndefinedScoreError,
    align_with_details,
    aligned_notes_from_json,
    aligned_notes_to_json,
    extract_f0,
    validate_alignment,
)
from ..align.aligner import AlignedNote
from ..align.f0 import F0Track
from ..evaluation import duration_statistics
from ..features.audio import AudioBuffer, load_wav, resample
from ..features.logmel import DEFAULT_RATE as LOG_MEL_RATE
from ..features.logmel import log_mel
from ..features.loudness import REQUIRED_RATE as BARK_RATE
from ..features.loudness import bark_specific_loudness
from ..features.matrix import KIND_BARK, KIND_LOG_MEL, downsample_time, load_dynf, save_dynf
from ..labeling import frames_from_alignment, label_spans_to_json, save_dynl, load_dynl
from ..score import (
    DynamicCategory,
    NoteDynamicLabel,
    ScoreDocument,
    parse_musicxml_file,
    propagate_note_dynamics,
    resolve_sf,
)
from .manifest import STATUS_RANK, PerformanceRecord, StatusTransitionError

STAGES = ("features", "align", "label")

# (feature kind, pooling factor, label-file tag): the four report hops
DOWNSAMPLE_PLANS = (
    (KIND_BARK, 8, "16ms"),
    (KIND_LOG_MEL, 3, "17.4ms"),
    (KIND_LOG_MEL, 5, "29ms"),
    (KIND_BARK, 15, "30ms"),
)

_FEATURE_FILES = {KIND_LOG_MEL: "logmel.dynf", KIND_BARK: "bark.dynf"}


class StageOrderError(StatusTransitionError):
    """Stage requested before its prerequisite status."""


def artifact_dir(workspace: str | Path, record_id: str) -> Path:
    return Path(workspace) / "artifacts" / record_id


def _resolve(workspace: Path, path: str) -> Path:
    candidate = Path(path)
    return candidate if candidate.is_absolute() else workspace / candidate


def load_score(path: str | Path) -> ScoreDocument:
    path = Path(path)
    if path.suffix == ".json":
        return ScoreDocument.from_json(path.read_text())
    return parse_musicxml_file(path)


def resolved_note_labels(score: ScoreDocument) -> list[NoteDynamicLabel]:
    """Per-note absolute dynamics: unlabeled-prefix notes are dropped, and
    any leading sf notes (which have no held value to resume) go with them."""
    labels = propagate_note_dynamics(score, on_unlabeled="drop")
    while labels and labels[0].category is DynamicCategory.SF:
        labels.pop(0)
    return resolve_sf(labels)


def _require_rank(record: PerformanceRecord, stage: str, minimum: int):
    if record.status == "rejected":
        raise StageOrderError(f"record {record.id!r} is rejected; no further stages")
    if STATUS_RANK[record.status] < minimum:
        raise StageOrderError(
            f"record {record.id!r}: stage {stage!r} needs rank {minimum}, "
            f"status is {record.status!r}"
        )


def _stem_audio(workspace: Path, record: PerformanceRecord) -> AudioBuffer:
    stem = _resolve(workspace, record.stem_path)
    if not stem.exists():
        raise FileNotFoundError(f"record {record.id!r}: stem file missing: {stem}")
    return load_wav(stem)


def run_stage(
    record: PerformanceRecord, stage: str, workspace: str | Path
) -> PerformanceRecord:
    workspace = Path(workspace)
    if stage == "features":
        _run_features(record, workspace)
    elif stage == "align":
        _run_align(record, workspace)
    elif stage == "label":
        _run_label(record, workspace)
    else:
        raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")
    return record


def _run_features(record: PerformanceRecord, workspace: Path):
    _require_rank(record, "features", 0)
    stem = _stem_audio(workspace, record)
    out = artifact_dir(workspace, record.id)
    out.mkdir(parents=True, exist_ok=True)
    save_dynf(out / _FEATURE_FILES[KIND_LOG_MEL], log_mel(resample(stem, LOG_MEL_RATE)))
    save_dynf(out / _FEATURE_FILES[KIND_BARK], bark_specific_loudness(resample(stem, BARK_RATE)))
    if record.status == "pending":
        record.advance("features_done")


def _run_align(record: PerformanceRecord, workspace: Path):
    _require_rank(record, "align", 1)
    out = artifact_dir(workspace, record.id)
    for kind in _FEATURE_FILES.values():
        if not (out / kind).exists():
            raise StageOrderError(f"record {record.id!r}: run the features stage first")
    score = load_score(_resolve(workspace, record.score_path))
    mix = load_wav(_resolve(workspace, record.audio_path))
    result = align_with_details(score, mix)
    track = extract_f0(_stem_audio(workspace, record))
    try:
        score_value = validate_alignment(result.notes, track)
    except UndefinedScoreError:
        score_value = 0.0  # nothing voiced inside any note: reviewable, poor
    (out / "aligned.json").write_text(json.dumps(aligned_notes_to_json(result.notes), indent=2))
    (out / "f0.json").write_text(
        json.dumps(
            {
                "hop_seconds": track.hop_seconds,
                "frequencies": [round(float(f), 6) for f in track.frequencies],
                "confidence": [round(float(c), 6) for c in track.confidence],
            }
        )
    )
    labels = resolved_note_labels(score)
    aligned_by_note = {id(a.note): a for a in result.notes}
    spans = label_spans_to_json([aligned_by_note[id(lab.note)] for lab in labels], labels)
    (out / "dynamics.json").write_text(json.dumps(spans, indent=2))
    record.alignment_score = float(score_value)
    if record.status == "features_done":
        record.advance("aligned")


def _run_label(record: PerformanceRecord, workspace: Path):
    _require_rank(record, "label", 3)
    out = artifact_dir(workspace, record.id)
    score = load_score(_resolve(workspace, record.score_path))
    rows = json.loads((out / "aligned.json").read_text())
    aligned = aligned_notes_from_json(rows, score.vocal_notes())
    labels = resolved_note_labels(score)
    aligned_by_note = {id(a.note): a for a in aligned}
    pairs: list[AlignedNote] = [aligned_by_note[id(lab.note)] for lab in labels]
    for kind, factor, tag in DOWNSAMPLE_PLANS:
        spec = downsample_time(load_dynf(out / _FEATURE_FILES[kind]), factor)
        seq = frames_from_alignment(pairs, labels, spec.hop_seconds, spec.frames)
        save_dynl(out / f"labels_{tag}.dynl", seq)
    if record.status == "accepted":
        record.advance("labeled")


def build_f0_track(path: str | Path) -> F0Track:
    raw = json.loads(Path(path).read_text())
    return F0Track(
        frequencies=np.asarray(raw["frequencies"], dtype=float),
        confidence=np.asarray(raw["confidence"], dtype=float),
        hop_seconds=raw["hop_seconds"],
    )


def export_dataset(
    records: list[PerformanceRecord], workspace: str | Path, out_dir: str | Path
) -> dict:
    """Copy features + labels of labeled records and write a summary."""
    workspace = Path(workspace)
    out_dir = Path(out_dir)
    labeled = [r for r in records if r.status == "labeled"]
    if not labeled:
        raise ValueError("no labeled records to export")
    label_files = []
    for record in labeled:
        src = artifact_dir(workspace, record.id)
        dst = out_dir / record.id
        dst.mkdir(parents=True, exist_ok=True)
        names = list(_FEATURE_FILES.values()) + [
            f"labels_{tag}.dynl" for _, _, tag in DOWNSAMPLE_PLANS
        ]
        for name in names:
            shutil.copy2(src / name, dst / name)
        label_files.append(load_dynl(src / "labels_16ms.dynl"))
    class_seconds = duration_statistics(label_files)
    summary = {
        "performances": len(labeled),
        "class_seconds": {str(k): round(v, 3) for k, v in class_seconds.items()},
        "class_frames": {
            str(cls): int(round(seconds / 0.016)) for cls, seconds in class_seconds.items()
        },
        "total_hours": round(sum(class_seconds.values()) / 3600.0, 6),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary
