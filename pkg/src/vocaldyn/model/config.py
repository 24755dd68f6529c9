"""Model and training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

NUM_CLASSES = 10


@dataclass(frozen=True)
class ModelConfig:
    """Shape knobs for the multi-scale temporal CNN with self-attention.

    The bin embedding width equals channels[0]; each conv stage runs one
    kernel per entry of conv_scales and concatenates along channels, so the
    attention input width is len(conv_scales) * channels[1].
    """

    input_bins: int
    sequence_length: int
    conv_scales: tuple[int, ...] = (3, 7, 15)
    channels: tuple[int, int] = (16, 32)
    attention_heads: int = 4
    attention_dim: int = 64
    classes: int = NUM_CLASSES
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "conv_scales", tuple(self.conv_scales))
        object.__setattr__(self, "channels", tuple(self.channels))
        if self.input_bins < 1:
            raise ValueError("input_bins must be positive")
        if self.sequence_length < 1:
            raise ValueError("sequence_length must be positive")
        if not self.conv_scales or any(k < 1 for k in self.conv_scales):
            raise ValueError("conv_scales must be positive kernel sizes")
        if len(self.channels) != 2 or any(c < 1 for c in self.channels):
            raise ValueError("exactly two conv stages with positive widths")
        if self.attention_heads < 1:
            raise ValueError("attention_heads must be positive")
        if self.attention_dim % self.attention_heads != 0:
            raise ValueError("attention_dim must be divisible by attention_heads")
        if self.classes != NUM_CLASSES:
            raise ValueError(f"classes is fixed at {NUM_CLASSES}")

    @property
    def embed_dim(self) -> int:
        return self.channels[0]

    @property
    def attention_input_dim(self) -> int:
        return len(self.conv_scales) * self.channels[1]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 4
    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    class_weighting: bool = False  # optional inverse-frequency loss weights

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
