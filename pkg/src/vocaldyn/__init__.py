"""Toolkit for curating dynamics-annotated singing voice datasets and
training frame-wise dynamics estimators.

Subpackages:
    score       MusicXML parsing, dynamics extraction and propagation
    features    log-Mel and Bark specific-loudness input representations
    align       chroma-based DTW score-to-audio synchronization and f0
    model       multi-scale CNN + self-attention classifier (numpy)
    pipeline    curation workflow, CLI and review HTTP service

Top-level modules:
    labels      frame-wise 10-class target construction
    evaluation  exact/relaxed accuracies, confusion matrices, reports
"""

__version__ = "0.1.0"
