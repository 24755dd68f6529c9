"""Frame-level scoring: exact/relaxed accuracy, confusion counts, and the
results table with both JSON and aligned-text renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .features.matrix import KIND_BARK, KIND_LOG_MEL
from .labeling import NUM_CLASSES, FrameLabelSequence


class UndefinedMetricError(ValueError):
    """Metric requested over zero masked-in frames."""


def _checked_pair(predictions, labels: FrameLabelSequence):
    predictions = np.asarray(predictions)
    if predictions.shape != (labels.frames,):
        raise ValueError(
            f"predictions shape {predictions.shape} != ({labels.frames},)"
        )
    if labels.masked_in_count == 0:
        raise UndefinedMetricError("no masked-in frames; metric is undefined")
    mask = labels.mask
    return predictions[mask].astype(int), labels.class_index[mask].astype(int)


def relaxed_accuracy(predictions, labels: FrameLabelSequence, tolerance: int) -> float:
    """Percentage of masked-in frames with |prediction - label| <= tolerance."""
    if tolerance not in (0, 1, 2):
        raise ValueError(f"tolerance must be 0, 1 or 2, got {tolerance}")
    pred, ref = _checked_pair(predictions, labels)
    hits = int((np.abs(pred - ref) <= tolerance).sum())
    return 100.0 * hits / len(ref)


def confusion_matrix(predictions, labels: FrameLabelSequence) -> np.ndarray:
    """cell (i, j) = masked-in frames with label i and prediction j."""
    pred, ref = _checked_pair(predictions, labels)
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(counts, (ref, pred), 1)
    return counts


def round_half_up(value: float, places: int = 2) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class RunConfig:
    """Echoed configuration identifying a results-table row."""

    feature_kind: str
    sequence_length: int
    resolution_ms: float

    def __post_init__(self):
        if self.feature_kind not in (KIND_LOG_MEL, KIND_BARK):
            raise ValueError(f"unknown feature kind {self.feature_kind!r}")


@dataclass(frozen=True)
class ReportRow:
    config: RunConfig
    acc: float
    acc_pm1: float
    acc_pm2: float
    masked_frame_count: int
    confusion: np.ndarray

    def __post_init__(self):
        if not self.acc <= self.acc_pm1 + 1e-9 or not self.acc_pm1 <= self.acc_pm2 + 1e-9:
            raise ValueError("accuracies must be monotone in tolerance")
        if self.confusion.sum() != self.masked_frame_count:
            raise ValueError("confusion total must equal the masked frame count")


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[ReportRow, ...]
    aggregation: str = "global-frame"  # frames pooled across runs of a config

    _FEATURE_NAMES = {KIND_LOG_MEL: "log-Mel", KIND_BARK: "Bark"}
    _COLUMNS = ("Seq Length", "Temporal Resolution", "Perceptual Feature",
                "Acc", "Acc±1", "Acc±2")

    def to_json(self) -> str:
        payload = {
            "metadata": {"aggregation": self.aggregation},
            "rows": [
                {
                    "sequence_length": row.config.sequence_length,
                    "resolution_ms": row.config.resolution_ms,
                    "feature": self._FEATURE_NAMES[row.config.feature_kind],
                    "acc": round_half_up(row.acc),
                    "acc_pm1": round_half_up(row.acc_pm1),
                    "acc_pm2": round_half_up(row.acc_pm2),
                    "masked_frame_count": row.masked_frame_count,
                    "confusion": row.confusion.tolist(),
                }
                for row in self.rows
            ],
        }
        return json.dumps(payload, indent=2)

    def to_text(self) -> str:
        cells = [
            (
                str(row.config.sequence_length),
                f"{row.config.resolution_ms:g} ms",
                self._FEATURE_NAMES[row.config.feature_kind],
                f"{round_half_up(row.acc):.2f}",
                f"{round_half_up(row.acc_pm1):.2f}",
                f"{round_half_up(row.acc_pm2):.2f}",
            )
            for row in self.rows
        ]
        widths = [
            max(len(self._COLUMNS[c]), *(len(r[c]) for r in cells)) if cells else len(self._COLUMNS[c])
            for c in range(len(self._COLUMNS))
        ]
        def fmt(row):
            return "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        lines = [fmt(self._COLUMNS), fmt(tuple("-" * w for w in widths))]
        lines.extend(fmt(r) for r in cells)
        return "\n".join(lines) + "\n"


def _sort_key(config: RunConfig):
    kind_rank = 0 if config.feature_kind == KIND_LOG_MEL else 1
    return (kind_rank, config.sequence_length, config.resolution_ms)


def build_report(
    runs: list[tuple[np.ndarray, FrameLabelSequence, RunConfig]]
) -> EvalReport:
    """One row per distinct config; frames pooled globally across its runs."""
    if not runs:
        raise ValueError("no runs to report")
    grouped: dict[RunConfig, list[tuple[np.ndarray, FrameLabelSequence]]] = {}
    for predictions, labels, config in runs:
        grouped.setdefault(config, []).append((predictions, labels))
    rows = []
    for config in sorted(grouped, key=_sort_key):
        pred_parts, ref_parts = [], []
        for predictions, labels in grouped[config]:
            pred, ref = _checked_pair(predictions, labels)
            pred_parts.append(pred)
            ref_parts.append(ref)
        pred = np.concatenate(pred_parts)
        ref = np.concatenate(ref_parts)
        diff = np.abs(pred - ref)
        counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
        np.add.at(counts, (ref, pred), 1)
        rows.append(
            ReportRow(
                config=config,
                acc=100.0 * int((diff == 0).sum()) / len(ref),
                acc_pm1=100.0 * int((diff <= 1).sum()) / len(ref),
                acc_pm2=100.0 * int((diff <= 2).sum()) / len(ref),
                masked_frame_count=len(ref),
                confusion=counts,
            )
        )
    return EvalReport(rows=tuple(rows))


def duration_statistics(label_files: list[FrameLabelSequence]) -> dict[int, float]:
    """Masked-in seconds per class, summed across files; every class keyed."""
    seconds = {cls: 0.0 for cls in range(NUM_CLASSES)}
    for labels in label_files:
        counts = np.bincount(
            labels.class_index[labels.mask].astype(int), minlength=NUM_CLASSES
        )
        for cls in range(NUM_CLASSES):
            seconds[cls] += float(counts[cls]) * labels.hop_seconds
    return seconds
