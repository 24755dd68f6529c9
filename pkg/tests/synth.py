"""Render ScoreDocuments to audio for alignment and training fixtures.

Notes become sines (plus a soft octave harmonic) at equal-tempered pitch,
with peak amplitude set by dynamic class so louder markings are physically
louder in the waveform.
"""

import numpy as np

from vocaldyn.align.f0 import pitch_to_hz
from vocaldyn.features.audio import AudioBuffer

# 4 dB per class step, pppp at -48 dBFS
CLASS_TIER_DB = {idx: -48.0 + 4.0 * idx for idx in range(10)}

_FADE_SECONDS = 0.01


def class_amplitude(class_index: int) -> float:
    return 10.0 ** (CLASS_TIER_DB[class_index] / 20.0)


def _add_note(out, freq, start_s, dur_s, amplitude, rate):
    start = int(round(start_s * rate))
    length = max(1, int(round(dur_s * rate)))
    end = min(start + length, len(out))
    if start >= end:
        return
    n = end - start
    t = np.arange(n) / rate
    tone = np.sin(2 * np.pi * freq * t) + 0.3 * np.sin(2 * np.pi * 2 * freq * t)
    fade = min(int(_FADE_SECONDS * rate), n // 2)
    env = np.ones(n)
    if fade > 0:
        ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(fade) / fade)
        env[:fade] = ramp
        env[-fade:] = ramp[::-1]
    out[start:end] += amplitude * tone * env


def render_score(
    score,
    sample_rate=22050,
    tempo_qpm=None,
    vocal_amplitude=0.1,
    accomp_amplitude=0.04,
    vocal_class_of=None,
    tail_seconds=0.25,
):
    """vocal_class_of: optional callable NoteEvent -> class index 0..9; when
    given, vocal notes use the class amplitude tiers instead of the flat
    vocal_amplitude."""
    tempo = tempo_qpm or score.tempo_hint or 120.0
    spq = 60.0 / tempo
    notes = score.all_notes()
    total = max(n.onset + n.duration for n in notes) * spq + tail_seconds
    out = np.zeros(int(np.ceil(total * sample_rate)))
    for note in notes:
        if note.part_id == "vocal":
            if vocal_class_of is not None:
                amp = class_amplitude(vocal_class_of(note))
            else:
                amp = vocal_amplitude
        else:
            amp = accomp_amplitude
        _add_note(out, pitch_to_hz(note.pitch), note.onset * spq, note.duration * spq, amp, sample_rate)
    peak = np.abs(out).max()
    if peak > 0.99:
        out *= 0.99 / peak
    return AudioBuffer(samples=out, sample_rate=sample_rate)
