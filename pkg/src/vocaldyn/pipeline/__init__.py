"""Curation workflow: manifest, stages, visualization, HTTP review service, CLI."""

from .manifest import (
    STATUS_RANK,
    STATUSES,
    PerformanceRecord,
    StatusTransitionError,
    UnknownRecordError,
    find_record,
    load_manifest,
    record_decision,
    save_manifest,
)
from .stages import (
    DOWNSAMPLE_PLANS,
    STAGES,
    StageOrderError,
    artifact_dir,
    export_dataset,
    load_score,
    resolved_note_labels,
    run_stage,
)
from .visualization import VisualizationBundle, build_visualization
from .service import create_app, serve_review

__all__ = [
    "DOWNSAMPLE_PLANS",
    "PerformanceRecord",
    "STAGES",
    "STATUSES",
    "STATUS_RANK",
    "StageOrderError",
    "StatusTransitionError",
    "UnknownRecordError",
    "VisualizationBundle",
    "artifact_dir",
    "build_visualization",
    "create_app",
    "export_dataset",
    "find_record",
    "load_manifest",
    "load_score",
    "record_decision",
    "resolved_note_labels",
    "run_stage",
    "save_manifest",
    "serve_review",
]
