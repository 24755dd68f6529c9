"""Figure rendering for the CLI report paths.

Every plot goes straight to a file; no interactive backend is assumed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ..evaluation import EvalReport
from ..labeling import CLASS_CATEGORIES
from .visualization import VisualizationBundle

_REGION_COLORS = {None: "#8da0cb", "crescendo": "#fc8d62", "diminuendo": "#66c2a5"}


def save_alignment_figure(bundle: VisualizationBundle, path: str | Path, title: str = ""):
    """Three stacked panels on a shared time axis: f0 over note rectangles,
    waveform envelope, and held-dynamics regions."""
    fig, axes = plt.subplots(3, 1, figsize=(12, 7), sharex=True, height_ratios=[3, 2, 1])
    top, mid, bot = axes

    for n in bundle.notes:
        top.hlines(n["pitch_hz"], n["onset"], n["offset"], colors="black", lw=3, alpha=0.6)
    if bundle.f0:
        pts = np.asarray(bundle.f0)
        top.plot(pts[:, 0], pts[:, 1], ".", ms=2, color="crimson")
    top.set_yscale("log")
    top.set_ylabel("Hz")
    if title:
        top.set_title(title)

    env = np.asarray(bundle.envelope, dtype=float)
    t = np.linspace(0.0, bundle.duration_seconds, len(env), endpoint=False)
    mid.fill_between(t, env[:, 0], env[:, 1], color="#4c72b0", lw=0)
    mid.set_ylabel("amplitude")

    for r in bundle.regions:
        bot.axvspan(r["start"], r["end"], color=_REGION_COLORS.get(r["region"], "#8da0cb"), alpha=0.7)
        bot.text(
            (r["start"] + r["end"]) / 2, 0.5, r["category"],
            ha="center", va="center", fontsize=8,
        )
    bot.set_yticks([])
    bot.set_xlim(0.0, bundle.duration_seconds)
    bot.set_xlabel("time (s)")

    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_class_distribution_figure(class_seconds: dict[int, float], path: str | Path):
    """Bar chart of labeled seconds per dynamics class."""
    classes = sorted(class_seconds)
    values = [class_seconds[c] for c in classes]
    names = [CLASS_CATEGORIES[c].value for c in classes]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(names, values, color="#4c72b0")
    ax.set_ylabel("seconds")
    ax.set_xlabel("dynamics class")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_report_figure(report: EvalReport, path: str | Path):
    """Grouped bars: exact and relaxed accuracy per run configuration."""
    rows = report.rows
    labels = [
        f"{row.config.feature_kind}\nseq {row.config.sequence_length}" for row in rows
    ]
    x = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(2 + 2 * max(len(rows), 1), 4))
    ax.bar(x - 0.25, [r.acc for r in rows], width=0.25, label="Acc")
    ax.bar(x, [r.acc_pm1 for r in rows], width=0.25, label="Acc±1")
    ax.bar(x + 0.25, [r.acc_pm2 for r in rows], width=0.25, label="Acc±2")
    ax.set_xticks(x, labels, fontsize=8)
    ax.set_ylim(0, 100)
    ax.set_ylabel("%")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_history_figure(history: list, path: str | Path):
    """Loss and masked accuracy curves over training epochs."""
    epochs = [h.epoch for h in history]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(epochs, [h.loss for h in history], label="loss", color="#c44e52")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    twin = ax.twinx()
    twin.plot(epochs, [h.masked_accuracy for h in history], label="accuracy", color="#4c72b0")
    twin.set_ylabel("masked accuracy")
    twin.set_ylim(0, 1)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
