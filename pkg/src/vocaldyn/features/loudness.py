"""Time-varying Bark specific loudness (Zwicker method).

Chain: third-octave band levels (25 Hz - 12.5 kHz) -> equal-loudness
corrections at low frequencies -> outer/middle ear transmission ->
critical-band core loudness with the Zwicker nonlinearity -> nonlinear
temporal decay -> upper-slope spectral spreading sampled at 0.1 Bark,
giving 240 specific-loudness bins every 2 ms.

Operates on 48 kHz input only; digital full scale maps to a configurable
SPL (default 94 dB, i.e. 1 Pa RMS for a full-scale sine).
"""

from __future__ import annotations

import numpy as np
from scipy.signal import butter, sosfilt

from .audio import AudioBuffer
from .matrix import BARK_BINS, KIND_BARK, FeatureMatrix

REQUIRED_RATE = 48000
HOP_SECONDS = 0.002
DEFAULT_CALIBRATION_DB_SPL = 94.0

_ENVELOPE_RATE = 2000       # internal envelope sampling (0.5 ms)
_ENVELOPE_DECIM = REQUIRED_RATE // _ENVELOPE_RATE
_OUTPUT_DECIM = int(HOP_SECONDS * _ENVELOPE_RATE)  # 2 ms output frames

# Third-octave band center frequencies.
CENTER_FREQS = np.array([
    25, 31.5, 40, 50, 63, 80, 100, 125, 160, 200, 250, 315, 400, 500, 630,
    800, 1000, 1250, 1600, 2000, 2500, 3150, 4000, 5000, 6300, 8000, 10000,
    12500,
], dtype=np.float64)

# Upper bounds of the level ranges used for the low-frequency equal-loudness
# correction of the lowest 11 third-octave bands.
_RAP = np.array([45, 55, 65, 71, 80, 90, 100, 120], dtype=np.float64)

# Level reductions per range (rows) and low band (columns).
_DLL = np.array([
    [-32, -24, -16, -10, -5, 0, -7, -3, 0, -2, 0],
    [-29, -22, -15, -10, -4, 0, -7, -2, 0, -2, 0],
    [-27, -19, -14, -9, -4, 0, -6, -2, 0, -2, 0],
    [-25, -17, -12, -9, -3, 0, -5, -2, 0, -2, 0],
    [-23, -16, -11, -7, -3, 0, -4, -1, 0, -1, 0],
    [-20, -14, -10, -6, -3, 0, -4, -1, 0, -1, 0],
    [-18, -12, -9, -6, -2, 0, -3, -1, 0, -1, 0],
    [-15, -10, -8, -4, -2, 0, -3, -1, 0, -1, 0],
], dtype=np.float64)

# Critical-band level at the threshold in quiet.
_LTQ = np.array([30, 18, 12, 8, 7, 6, 5, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3],
                dtype=np.float64)

# Outer/middle ear transmission attenuation.
_A0 = np.array([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -0.5, -1.6, -3.2, -5.4, -5.6,
                -4.0, -1.5, 2.0, 5.0, 12.0], dtype=np.float64)

# Free-to-diffuse field level difference.
_DDF = np.array([0, 0, 0.5, 0.9, 1.2, 1.6, 2.3, 2.8, 3.0, 2.0, 0, -1.4, -2.0,
                 -1.9, -1.0, 0.5, 3.0, 4.0, 4.3, 4.0], dtype=np.float64)

# Third-octave to critical-band level adaptation.
_DCB = np.array([-0.25, -0.6, -0.8, -0.8, -0.5, 0, 0.5, 1.1, 1.5, 1.7, 1.8,
                 1.8, 1.7, 1.6, 1.4, 1.2, 0.8, 0.5, 0, -0.5], dtype=np.float64)

# Upper Bark limit of each critical band (21st entry terminates the scale).
_ZUP = np.array([0.9, 1.8, 2.8, 3.5, 4.4, 5.4, 6.6, 7.9, 9.2, 10.6, 12.3,
                 13.8, 15.2, 16.7, 18.1, 19.3, 20.6, 21.8, 22.7, 23.6, 24.0],
                dtype=np.float64)

# Specific-loudness ranges governing the steepness of the upper slopes.
_RNS = np.array([21.5, 18.0, 15.1, 11.5, 9.0, 6.1, 4.4, 3.1, 2.13, 1.36,
                 0.82, 0.42, 0.30, 0.22, 0.15, 0.10, 0.035, 0.0],
                dtype=np.float64)

# Upper-slope steepness per range (rows) and critical band number (columns,
# capped at 8).
_USL = np.array([
    [13.00, 8.20, 6.30, 5.50, 5.50, 5.50, 5.50, 5.50],
    [9.00, 7.50, 6.00, 5.10, 4.50, 4.50, 4.50, 4.50],
    [7.80, 6.70, 5.60, 4.90, 4.40, 3.90, 3.90, 3.90],
    [6.20, 5.40, 4.60, 4.00, 3.50, 3.20, 3.20, 3.20],
    [4.50, 3.80, 3.60, 3.20, 2.90, 2.70, 2.70, 2.70],
    [3.70, 3.00, 2.80, 2.35, 2.20, 2.20, 2.20, 2.20],
    [2.90, 2.30, 2.10, 1.90, 1.80, 1.70, 1.70, 1.70],
    [2.40, 1.70, 1.50, 1.35, 1.30, 1.30, 1.30, 1.30],
    [1.95, 1.45, 1.30, 1.15, 1.10, 1.10, 1.10, 1.10],
    [1.50, 1.20, 0.94, 0.86, 0.82, 0.82, 0.82, 0.82],
    [0.72, 0.67, 0.64, 0.63, 0.62, 0.62, 0.62, 0.62],
    [0.59, 0.53, 0.51, 0.50, 0.42, 0.42, 0.42, 0.42],
    [0.40, 0.33, 0.26, 0.24, 0.22, 0.22, 0.22, 0.22],
    [0.27, 0.21, 0.20, 0.18, 0.17, 0.17, 0.17, 0.17],
    [0.16, 0.15, 0.14, 0.12, 0.11, 0.11, 0.11, 0.11],
    [0.12, 0.11, 0.10, 0.08, 0.08, 0.08, 0.08, 0.08],
    [0.09, 0.08, 0.07, 0.06, 0.06, 0.06, 0.06, 0.05],
    [0.06, 0.05, 0.03, 0.02, 0.02, 0.02, 0.02, 0.02],
], dtype=np.float64)

# Nonlinear decay time constants: fast decay toward the slow envelope,
# slow decay once reached, and the envelope's own tracking constant.
_TAU_SHORT = 0.005
_TAU_LONG = 0.015
_TAU_VAR = 0.075

_INTENSITY_FLOOR = 1e-30


def _filterbank_sos(order: int = 3):
    """Three biquad sections per band (6th-order Butterworth bandpass); low
    bands run on a decimated signal to keep the narrowband designs
    numerically well conditioned. The skirt selectivity matters: adjacent
    bands of a pure tone sit 18-25 dB down and contribute audible excitation,
    which is part of hitting the sone calibration points."""
    bank = []
    for fc in CENTER_FREQS:
        # factors divide the 24x envelope decimation so each band's envelope
        # lands exactly on the 2 kHz internal grid
        decim = 24 if fc < 200 else (4 if fc < 1600 else 1)
        rate = REQUIRED_RATE / decim
        lo = fc * 2 ** (-1 / 6)
        hi = fc * 2 ** (1 / 6)
        sos = butter(order, [lo / (rate / 2), hi / (rate / 2)], btype="bandpass", output="sos")
        bank.append((sos, decim))
    return bank


_SOS_BANK = None


def _get_bank():
    global _SOS_BANK
    if _SOS_BANK is None:
        _SOS_BANK = _filterbank_sos()
    return _SOS_BANK


def third_octave_levels(samples: np.ndarray, calibration_db_spl_fs: float) -> np.ndarray:
    """Band levels in dB SPL sampled every 0.5 ms, shape (frames, 28).

    Band outputs are squared and smoothed by three cascaded first-order
    low-passes with tau = 2/(3 fc), clamped at the 1 kHz value.
    """
    bank = _get_bank()
    n_frames = int(np.ceil(len(samples) / _ENVELOPE_DECIM))
    levels = np.empty((n_frames, len(CENTER_FREQS)))
    # full-scale sine has mean square 0.5
    offset = calibration_db_spl_fs - 10.0 * np.log10(0.5)
    decimated: dict[int, np.ndarray] = {1: samples}
    for b, (sos, decim) in enumerate(bank):
        if decim not in decimated:
            decimated[decim] = _decimate(samples, decim)
        x = sosfilt(sos, decimated[decim])
        env = _square_and_smooth(x * x, CENTER_FREQS[b], REQUIRED_RATE / decim)
        env_at_2k = _sample_envelope(env, _ENVELOPE_DECIM // decim, n_frames)
        levels[:, b] = 10.0 * np.log10(np.maximum(env_at_2k, _INTENSITY_FLOOR)) + offset
    return levels


def _decimate(samples: np.ndarray, factor: int) -> np.ndarray:
    """Staged anti-aliased decimation for the low-band filters."""
    out = samples
    remaining = factor
    while remaining > 1:
        step = next(s for s in (4, 3, 2) if remaining % s == 0)
        sos = butter(8, 0.8 / step, output="sos")
        out = sosfilt(sos, out)[::step]
        remaining //= step
    return out


def _square_and_smooth(power: np.ndarray, fc: float, rate: float) -> np.ndarray:
    tau = 2.0 / (3.0 * min(fc, 1000.0))
    a = np.exp(-1.0 / (rate * tau))
    b = np.array([1.0 - a])
    a_coef = np.array([1.0, -a])
    out = power
    from scipy.signal import lfilter

    for _ in range(3):
        out = lfilter(b, a_coef, out)
    return out


def _sample_envelope(env: np.ndarray, step: int, n_frames: int) -> np.ndarray:
    idx = np.arange(n_frames) * step
    idx = np.minimum(idx, len(env) - 1)
    return env[idx]


def core_loudness(levels: np.ndarray, field_type: str = "free") -> np.ndarray:
    """Critical-band core loudness, shape (frames, 21); the 21st band is the
    zero terminator used by the slope integration."""
    if field_type not in ("free", "diffuse"):
        raise ValueError(f"field_type must be 'free' or 'diffuse', got {field_type!r}")
    frames = levels.shape[0]

    # Low-frequency equal-loudness correction for bands 25..250 Hz: pick the
    # first level range that contains the band level, apply its reduction.
    low = levels[:, :11]
    corrected = low + _DLL[-1]
    chosen = np.zeros(low.shape, dtype=bool)
    for j in range(len(_RAP)):
        applies = ~chosen & (low <= _RAP[j] - _DLL[j])
        corrected = np.where(applies, low + _DLL[j], corrected)
        chosen |= applies
    intensity = 10.0 ** (corrected / 10.0)

    grouped = np.empty((frames, 3))
    grouped[:, 0] = intensity[:, 0:6].sum(axis=1)
    grouped[:, 1] = intensity[:, 6:9].sum(axis=1)
    grouped[:, 2] = intensity[:, 9:11].sum(axis=1)
    lcb = 10.0 * np.log10(np.maximum(grouped, _INTENSITY_FLOOR))

    le = np.concatenate([lcb, levels[:, 11:28]], axis=1)
    le = le - _A0
    if field_type == "diffuse":
        le = le + _DDF

    audible = le > _LTQ
    le_adj = le - _DCB
    s = 0.25
    mp1 = 0.0635 * 10.0 ** (0.025 * _LTQ)
    mp2 = (1.0 - s + s * 10.0 ** (0.1 * (le_adj - _LTQ))) ** 0.25 - 1.0
    core = np.where(audible, np.maximum(mp1 * mp2, 0.0), 0.0)

    # Threshold-in-quiet correction inside the lowest critical band.
    corr = np.minimum(0.4 + 0.32 * core[:, 0] ** 0.2, 1.0)
    core[:, 0] *= corr

    out = np.zeros((frames, 21))
    out[:, :20] = core
    return out


def nonlinear_decay(core: np.ndarray, rate: float = _ENVELOPE_RATE) -> np.ndarray:
    """Temporal post-masking per critical band: instantaneous attack, fast
    decay toward a slowly tracking envelope, slow decay along with it."""
    a_short = np.exp(-1.0 / (rate * _TAU_SHORT))
    a_long = np.exp(-1.0 / (rate * _TAU_LONG))
    a_var = np.exp(-1.0 / (rate * _TAU_VAR))
    out = np.empty_like(core)
    v = np.zeros(core.shape[1])
    w = np.zeros(core.shape[1])
    for t in range(core.shape[0]):
        u = core[t]
        rising = u >= v
        decay = np.where(v > w, a_short, a_long)
        decayed = np.maximum(u, u + (v - u) * decay)
        v = np.where(rising, u, decayed)
        w = np.minimum(v, w + (v - w) * (1.0 - a_var))
        out[t] = v
    return out


def specific_loudness_pattern(core_frame: np.ndarray) -> tuple[np.ndarray, float]:
    """Spread one core-loudness frame across the Bark axis.

    Returns 240 specific-loudness samples at 0.1 Bark plus the integrated
    total loudness in sone.
    """
    ns = np.zeros(BARK_BINS)
    total = 0.0
    z1 = 0.0
    n1 = 0.0
    iz = 0
    z = 0.1
    j = 17
    for i in range(21):
        zup = _ZUP[i] + 0.0001
        ig = min(max(i - 1, 0), 7)
        while z1 < zup:
            if n1 > core_frame[i]:
                # Upper slope of a louder lower band masks this one; descend
                # piecewise, the steepness depending on the current level range.
                n2 = max(_RNS[j], core_frame[i])
                steep = _USL[j, ig]
                dz = (n1 - n2) / steep
                z2 = z1 + dz
                if z2 > zup:
                    z2 = zup
                    dz = z2 - z1
                    n2 = n1 - dz * steep
                total += dz * (n1 + n2) / 2.0
                while z < z2 and iz < BARK_BINS:
                    ns[iz] = n1 - (z - z1) * steep
                    iz += 1
                    z += 0.1
            else:
                if n1 < core_frame[i]:
                    j = 0
                    while j < 17 and _RNS[j] >= core_frame[i]:
                        j += 1
                z2 = zup
                n2 = core_frame[i]
                total += n2 * (z2 - z1)
                while z < z2 and iz < BARK_BINS:
                    ns[iz] = n2
                    iz += 1
                    z += 0.1
            while j < 17 and n2 <= _RNS[j]:
                j += 1
            z1 = z2
            n1 = n2
    return np.maximum(ns, 0.0), max(total, 0.0)


def bark_specific_loudness(
    audio: AudioBuffer,
    calibration_db_spl_fs: float = DEFAULT_CALIBRATION_DB_SPL,
    field_type: str = "free",
) -> FeatureMatrix:
    """240-bin specific loudness (sone/Bark at 0.1 Bark spacing) every 2 ms.

    Raises SampleRateError unless the audio is at 48 kHz.
    """
    audio.require_rate(REQUIRED_RATE, "Bark loudness extraction")
    levels = third_octave_levels(audio.samples, calibration_db_spl_fs)
    core = core_loudness(levels, field_type)
    core = nonlinear_decay(core)
    out_frames = core[::_OUTPUT_DECIM]
    values = np.empty((out_frames.shape[0], BARK_BINS))
    for t in range(out_frames.shape[0]):
        values[t], _ = specific_loudness_pattern(out_frames[t])
    return FeatureMatrix(
        values=values,
        hop_seconds=HOP_SECONDS,
        kind=KIND_BARK,
        source_sample_rate=REQUIRED_RATE,
    )


def stationary_loudness(levels_db: np.ndarray, field_type: str = "free") -> tuple[float, np.ndarray]:
    """Loudness of one stationary 28-band third-octave spectrum; used as the
    steady-state reference for the time-varying path."""
    core = core_loudness(np.asarray(levels_db, dtype=np.float64)[None, :], field_type)
    ns, total = specific_loudness_pattern(core[0])
    return total, ns
