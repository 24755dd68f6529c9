"""Training loop: chunking, seeded ordering, Adam steps, JSON-lines history."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..features.matrix import FeatureMatrix
from ..labeling import FrameLabelSequence
from .adam import AdamState
from .config import ModelConfig, TrainConfig
from .network import (
    ModelParams,
    UndefinedLossError,
    _pad_chunk,
    backward_with_logits,
    chunk_spans,
    init_model,
    pad_labels,
)


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    masked_accuracy: float

    def to_json(self) -> str:
        return json.dumps(
            {"epoch": self.epoch, "loss": self.loss, "masked_accuracy": self.masked_accuracy}
        )


def build_chunks(
    dataset: list[tuple[FeatureMatrix, FrameLabelSequence]], config: ModelConfig
) -> list[tuple[np.ndarray, FrameLabelSequence]]:
    """Slice every item into abutting sequence_length windows; the final
    partial window is zero-padded with the pad frames masked out. Windows
    with no labeled frame are dropped (they define no loss)."""
    if not dataset:
        raise ValueError("dataset is empty")
    chunks = []
    for spec, labels in dataset:
        if spec.bins != config.input_bins:
            raise ValueError(f"feature bins {spec.bins} != config input_bins {config.input_bins}")
        if spec.frames != labels.frames:
            raise ValueError(f"{spec.frames} feature frames vs {labels.frames} label frames")
        if abs(spec.hop_seconds - labels.hop_seconds) > 1e-9:
            raise ValueError(
                f"feature hop {spec.hop_seconds} != label hop {labels.hop_seconds}"
            )
        for start, end in chunk_spans(spec.frames, config.sequence_length):
            if end <= start:
                continue
            window = FrameLabelSequence(
                class_index=labels.class_index[start:end],
                mask=labels.mask[start:end],
                hop_seconds=labels.hop_seconds,
            )
            if not window.mask.any():
                continue
            chunks.append(
                (
                    _pad_chunk(spec.values[start:end], config.sequence_length),
                    pad_labels(window, config.sequence_length),
                )
            )
    if not chunks:
        raise UndefinedLossError("no window contains a labeled frame")
    return chunks


def _inverse_frequency_weights(chunks) -> np.ndarray:
    counts = np.zeros(10)
    for _, labels in chunks:
        counts += np.bincount(labels.class_index[labels.mask].astype(int), minlength=10)
    present = counts > 0
    weights = np.ones(10)
    weights[present] = counts[present].sum() / (present.sum() * counts[present])
    return weights


def train(
    dataset: list[tuple[FeatureMatrix, FrameLabelSequence]],
    model_config: ModelConfig,
    train_config: TrainConfig,
    params: ModelParams | None = None,
) -> tuple[ModelParams, list[EpochStats]]:
    """Adam on masked cross-entropy; deterministic given both seeds.

    History reports the running loss and masked accuracy of the forward
    passes made during each epoch (pre-update, standard training metrics).
    """
    chunks = build_chunks(dataset, model_config)
    if params is None:
        params = init_model(model_config)
    class_weights = _inverse_frequency_weights(chunks) if train_config.class_weighting else None
    state = AdamState(params.tensors)
    rng = np.random.default_rng(train_config.seed)
    history: list[EpochStats] = []
    for epoch in range(train_config.epochs):
        order = rng.permutation(len(chunks))
        epoch_loss = 0.0
        correct = 0
        labeled = 0
        for batch_start in range(0, len(order), train_config.batch_size):
            batch = order[batch_start: batch_start + train_config.batch_size]
            accumulated: dict[str, np.ndarray] | None = None
            for idx in batch:
                features, labels = chunks[idx]
                loss, grads, logits = backward_with_logits(params, features, labels, class_weights)
                epoch_loss += loss
                if accumulated is None:
                    accumulated = grads
                else:
                    for name in accumulated:
                        accumulated[name] += grads[name]
                pred = np.argmax(logits, axis=1)
                correct += int((pred[labels.mask] == labels.class_index[labels.mask]).sum())
                labeled += int(labels.mask.sum())
            for name in accumulated:
                accumulated[name] /= len(batch)
            state.apply(params.tensors, accumulated, train_config)
        history.append(
            EpochStats(
                epoch=epoch,
                loss=epoch_loss / len(chunks),
                masked_accuracy=correct / labeled if labeled else 0.0,
            )
        )
    return params, history


def write_history(path: str | Path, history: list[EpochStats]):
    Path(path).write_text("".join(stat.to_json() + "\n" for stat in history))
