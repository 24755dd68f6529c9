"""Audio I/O and the two perceptual feature representations."""

from .audio import AudioBuffer, SampleRateError, load_wav, resample, save_wav
from .logmel import LOG_FLOOR, LogMelConfig, log_mel, mel_filterbank
from .loudness import (
    DEFAULT_CALIBRATION_DB_SPL,
    bark_specific_loudness,
    stationary_loudness,
)
from .matrix import (
    BARK_BINS,
    KIND_BARK,
    KIND_CHROMA,
    KIND_LOG_MEL,
    FeatureMatrix,
    downsample_time,
    load_dynf,
    save_dynf,
    total_loudness,
)

__all__ = [
    "AudioBuffer",
    "SampleRateError",
    "load_wav",
    "save_wav",
    "resample",
    "LogMelConfig",
    "log_mel",
    "mel_filterbank",
    "LOG_FLOOR",
    "bark_specific_loudness",
    "stationary_loudness",
    "DEFAULT_CALIBRATION_DB_SPL",
    "FeatureMatrix",
    "BARK_BINS",
    "KIND_LOG_MEL",
    "KIND_BARK",
    "KIND_CHROMA",
    "downsample_time",
    "total_loudness",
    "load_dynf",
    "save_dynf",
]
