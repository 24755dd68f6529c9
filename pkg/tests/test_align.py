"""Chroma, DTW, full score-to-audio alignment, f0, and validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synth import render_score
from vocaldyn.align import (
    InfeasiblePathError,
    UndefinedScoreError,
    align_score_to_audio,
    align_with_details,
    audio_to_chroma,
    dtw,
    extract_f0,
    ingest_f0_csv,
    pitch_to_hz,
    score_to_chroma,
    validate_alignment,
)
from vocaldyn.align.aligner import AlignedNote
from vocaldyn.align.f0 import F0Track
from vocaldyn.features.audio import AudioBuffer
from vocaldyn.score.types import (
    DynamicCategory,
    DynamicMarking,
    EmptyScoreError,
    NoteEvent,
    ScoreDocument,
)


def note(pitch, onset, duration, part="vocal"):
    return NoteEvent(
        pitch=pitch, onset=onset, duration=duration, part_id=part, measure=1 + int(onset // 4)
    )


def lieder_score(vocal_pitches=(60, 62, 64, 67, 65, 64, 62, 60), tempo=None):
    vocal = [note(p, float(i), 1.0) for i, p in enumerate(vocal_pitches)]
    length = float(len(vocal_pitches))
    # accompaniment high enough that FFT-bin leakage stays within one
    # semitone, and in classes distinct from most of the melody
    rh = [note(72, o, 2.0, "piano_rh") for o in np.arange(0.0, length, 2.0)]
    lh = [note(55, o, 2.0, "piano_lh") for o in np.arange(0.0, length, 2.0)]
    markings = [
        DynamicMarking(category=DynamicCategory.P, offset=0.0, part_id="vocal"),
        DynamicMarking(category=DynamicCategory.MF, offset=2.0, part_id="vocal"),
        DynamicMarking(category=DynamicCategory.F, offset=4.0, part_id="vocal"),
        DynamicMarking(category=DynamicCategory.FF, offset=6.0, part_id="vocal"),
    ]
    return ScoreDocument(
        parts={"vocal": vocal, "piano_rh": rh, "piano_lh": lh},
        markings=markings,
        tempo_hint=tempo,
    )


class TestScoreChroma:
    def test_single_whole_note(self):
        score = ScoreDocument(parts={"vocal": [note(60, 0.0, 4.0)]}, markings=[])
        chroma = score_to_chroma(score)  # 120 BPM default -> 2 s -> 40 frames
        assert chroma.frames == 40
        np.testing.assert_allclose(chroma.values[:, 0], 1.0)
        assert chroma.values[:, 1:].sum() == 0

    def test_chord_weights_normalized(self):
        parts = {"vocal": [note(60, 0.0, 1.0)], "piano_rh": [note(64, 0.0, 1.0), note(67, 0.0, 1.0)]}
        chroma = score_to_chroma(ScoreDocument(parts=parts, markings=[]))
        frame = chroma.values[0]
        assert frame[[0, 4, 7]] == pytest.approx(1 / np.sqrt(3))
        assert np.linalg.norm(frame) == pytest.approx(1.0)

    def test_two_note_boundaries_at_120bpm(self):
        score = ScoreDocument(parts={"vocal": [note(60, 0.0, 1.0), note(64, 1.0, 1.0)]}, markings=[])
        chroma = score_to_chroma(score, grid_seconds=0.05)
        # quarter = 0.5 s = 10 frames
        assert (np.argmax(chroma.values[:10], axis=1) == 0).all()
        assert (np.argmax(chroma.values[10:20], axis=1) == 4).all()

    def test_empty_score_rejected(self):
        with pytest.raises(EmptyScoreError):
            score_to_chroma(ScoreDocument(parts={"vocal": []}, markings=[]))


class TestAudioChroma:
    def test_silence_frames_all_zero(self):
        buf = AudioBuffer(samples=np.zeros(22050), sample_rate=22050)
        chroma = audio_to_chroma(buf)
        assert np.abs(chroma.values).max() == 0.0

    def test_c4_sine_maps_to_class_zero(self):
        t = np.arange(22050) / 22050
        buf = AudioBuffer(samples=0.5 * np.sin(2 * np.pi * pitch_to_hz(60) * t), sample_rate=22050)
        chroma = audio_to_chroma(buf)
        assert (np.argmax(chroma.values, axis=1) == 0).all()

    def test_resamples_other_rates(self):
        t = np.arange(16000) / 16000
        buf = AudioBuffer(samples=0.5 * np.sin(2 * np.pi * pitch_to_hz(60) * t), sample_rate=16000)
        chroma = audio_to_chroma(buf)
        assert (np.argmax(chroma.values, axis=1) == 0).all()

    def test_triad_top3_classes(self):
        t = np.arange(22050) / 22050
        tri = sum(np.sin(2 * np.pi * pitch_to_hz(p) * t) for p in (60, 64, 67))
        chroma = audio_to_chroma(AudioBuffer(samples=0.3 * tri, sample_rate=22050))
        for frame in chroma.values:
            assert set(np.argsort(frame)[-3:]) == {0, 4, 7}

    def test_frames_unit_or_zero(self):
        rng = np.random.default_rng(5)
        buf = AudioBuffer(samples=0.1 * rng.standard_normal(22050), sample_rate=22050)
        norms = np.linalg.norm(audio_to_chroma(buf).values, axis=1)
        assert ((np.abs(norms - 1) < 1e-9) | (norms == 0)).all()


def enumerate_min_cost(cost):
    """Exhaustive path enumeration; independent of the DP implementation."""
    rows, cols = cost.shape
    best = [np.inf]

    def walk(i, j, acc):
        if (i, j) == (rows - 1, cols - 1):
            best[0] = min(best[0], acc)
            return
        for di, dj, w in ((1, 1, 2.0), (1, 2, 3.0), (2, 1, 3.0)):
            ni, nj = i + di, j + dj
            if ni < rows and nj < cols:
                walk(ni, nj, acc + w * cost[ni, nj])

    walk(0, 0, 2.0 * cost[0, 0])
    return best[0]


class TestDtw:
    def test_single_cell(self):
        path = dtw(np.array([[0.7]]))
        assert path.pairs == ((0, 0),)
        assert path.total_cost == pytest.approx(1.4)

    def test_zero_diagonal_stays_diagonal(self):
        cost = np.ones((4, 4)) - np.eye(4)
        path = dtw(cost)
        assert path.pairs == tuple((k, k) for k in range(4))
        assert path.total_cost == 0.0

    def test_infeasible_shapes(self):
        with pytest.raises(InfeasiblePathError):
            dtw(np.ones((1, 2)))
        with pytest.raises(InfeasiblePathError):
            dtw(np.ones((10, 3)))

    def test_rejects_negative_cost(self):
        with pytest.raises(ValueError):
            dtw(np.array([[0.5, -0.1], [0.2, 0.3]]))

    def test_matches_enumeration_8x11(self):
        rng = np.random.default_rng(42)
        for _ in range(3):
            cost = rng.uniform(0, 4, size=(8, 11))
            assert dtw(cost).total_cost == pytest.approx(enumerate_min_cost(cost))

    @given(
        rows=st.integers(min_value=1, max_value=7),
        cols=st.integers(min_value=1, max_value=7),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=40, deadline=None)
    def test_matches_enumeration_random(self, rows, cols, seed):
        if rows - 1 > 2 * (cols - 1) or cols - 1 > 2 * (rows - 1):
            with pytest.raises(InfeasiblePathError):
                dtw(np.ones((rows, cols)))
            return
        cost = np.random.default_rng(seed).uniform(0, 3, size=(rows, cols))
        assert dtw(cost).total_cost == pytest.approx(enumerate_min_cost(cost))

    def test_cost_bounded_by_diagonal(self):
        rng = np.random.default_rng(9)
        cost = rng.uniform(0, 1, size=(12, 12))
        assert dtw(cost).total_cost <= 2 * np.trace(cost) + 1e-12

    def test_scaling_by_two_keeps_path_exactly(self):
        cost = np.random.default_rng(3).uniform(0, 2, size=(9, 9))
        base = dtw(cost)
        scaled = dtw(2.0 * cost)
        assert scaled.pairs == base.pairs
        assert scaled.total_cost == pytest.approx(2.0 * base.total_cost)

    def test_backtrack_prefers_diagonal_then_tall(self):
        # all-zero costs leave every traversal optimal; tie-break decides
        assert dtw(np.zeros((3, 3))).pairs == ((0, 0), (1, 1), (2, 2))
        assert dtw(np.zeros((5, 3))).pairs == ((0, 0), (2, 1), (4, 2))


class TestAligner:
    def test_self_alignment_recovers_onsets(self):
        score = lieder_score()
        audio = render_score(score)  # 120 BPM, quarter = 0.5 s
        aligned = align_score_to_audio(score, audio)
        for i, a in enumerate(aligned):
            # two grid frames of slack for analysis-window blur
            assert abs(a.onset_seconds - 0.5 * i) <= 0.1 + 1e-6, f"note {i}: {a.onset_seconds}"

    def test_uniform_stretch_tracks_tempo(self):
        score = lieder_score()
        audio = render_score(score, tempo_qpm=100)  # x1.2 longer than assumed
        aligned = align_score_to_audio(score, audio)
        for i, a in enumerate(aligned):
            assert abs(a.onset_seconds - 0.6 * i) <= 0.1 + 1e-6, f"note {i}: {a.onset_seconds}"

    def test_onsets_monotone_offsets_positive(self):
        score = lieder_score()
        aligned = align_score_to_audio(score, render_score(score, tempo_qpm=132))
        onsets = [a.onset_seconds for a in aligned]
        assert onsets == sorted(onsets)
        assert all(a.offset_seconds > a.onset_seconds for a in aligned)

    def test_validation_separates_match_from_mismatch(self):
        score = lieder_score()
        stem = render_score(score, accomp_amplitude=0.0)
        aligned = align_score_to_audio(score, render_score(score))
        good = validate_alignment(aligned, extract_f0(stem))
        assert good >= 0.8

        other = lieder_score(vocal_pitches=(63, 66, 61, 68, 63, 66, 61, 68))
        wrong_stem = render_score(other, accomp_amplitude=0.0)
        bad = validate_alignment(aligned, extract_f0(wrong_stem))
        assert bad < 0.5
        assert bad < good

    def test_empty_vocal_part_rejected(self):
        score = ScoreDocument(parts={"vocal": [], "piano_rh": [note(60, 0.0, 1.0, "piano_rh")]}, markings=[])
        with pytest.raises(EmptyScoreError):
            align_score_to_audio(score, render_score(lieder_score()))

    def test_details_expose_path_and_cost(self):
        score = lieder_score()
        result = align_with_details(score, render_score(score))
        assert result.path.pairs[0] == (0, 0)
        assert result.mean_path_cost >= 0


class TestExtractF0:
    def test_sine_220(self):
        t = np.arange(22050) / 22050
        track = extract_f0(AudioBuffer(samples=0.5 * np.sin(2 * np.pi * 220 * t), sample_rate=22050))
        voiced = track.frequencies[track.frequencies > 0]
        assert len(voiced) > 0.9 * track.frames
        np.testing.assert_allclose(voiced, 220.0, atol=3.0)

    def test_white_noise_mostly_unvoiced(self):
        rng = np.random.default_rng(17)
        track = extract_f0(AudioBuffer(samples=0.3 * rng.standard_normal(22050), sample_rate=22050))
        assert (track.frequencies == 0).mean() >= 0.9

    def test_silence_unvoiced(self):
        track = extract_f0(AudioBuffer(samples=np.zeros(11025), sample_rate=22050))
        assert (track.frequencies == 0).all()

    def test_hop_and_confidence_ranges(self):
        t = np.arange(11025) / 22050
        track = extract_f0(AudioBuffer(samples=0.5 * np.sin(2 * np.pi * 330 * t), sample_rate=22050))
        # hop is rounded to whole samples: within half a sample of 10 ms
        assert abs(track.hop_seconds - 0.01) <= 0.5 / 22050 + 1e-12
        assert ((track.confidence >= 0) & (track.confidence <= 1)).all()


class TestIngestF0:
    def test_uniform_rows_identity(self):
        rows = [(k * 0.01, 200.0 + k, 0.9) for k in range(20)]
        track = ingest_f0_csv(rows)
        assert track.frames == 20
        np.testing.assert_allclose(track.frequencies, [200.0 + k for k in range(20)])

    def test_5ms_rows_keep_every_other(self):
        rows = [(k * 0.005, 100.0 + k, 1.0) for k in range(21)]
        track = ingest_f0_csv(rows)
        np.testing.assert_allclose(track.frequencies, [100.0 + 2 * k for k in range(11)])

    def test_jittered_rows_nearest_by_scan(self):
        rng = np.random.default_rng(23)
        times = np.sort(rng.uniform(0, 0.5, size=40))
        freqs = rng.uniform(100, 400, size=40)
        track = ingest_f0_csv([(t, f, 1.0) for t, f in zip(times, freqs)])
        for k in range(track.frames):
            nearest = np.argmin(np.abs(times - k * 0.01))
            assert track.frequencies[k] == pytest.approx(freqs[nearest])

    def test_unsorted_rows_rejected(self):
        with pytest.raises(ValueError, match="sorted"):
            ingest_f0_csv([(0.02, 100.0, 1.0), (0.0, 100.0, 1.0)])

    def test_negative_frequency_rejected(self):
        with pytest.raises(ValueError):
            ingest_f0_csv([(0.0, -5.0, 1.0)])

    def test_out_of_range_becomes_unvoiced(self):
        track = ingest_f0_csv([(0.0, 20.0, 1.0), (0.01, 3000.0, 1.0), (0.02, 440.0, 1.0)])
        np.testing.assert_allclose(track.frequencies, [0.0, 0.0, 440.0])


def make_track(freqs, hop=0.01):
    return F0Track(frequencies=np.array(freqs, dtype=float), confidence=np.ones(len(freqs)), hop_seconds=hop)


def aligned_fixture(pitch=69, onset=0.0, offset=0.5):
    ev = note(pitch, 0.0, 1.0)
    return [AlignedNote(note=ev, onset_seconds=onset, offset_seconds=offset)]


class TestValidateAlignment:
    def test_exact_pitch_scores_one(self):
        aligned = aligned_fixture(pitch=69)  # A4 = 440
        assert validate_alignment(aligned, make_track([440.0] * 50)) == 1.0

    def test_300_cents_off_scores_zero(self):
        aligned = aligned_fixture(pitch=69)
        shifted = 440.0 * 2 ** (300 / 1200)
        assert validate_alignment(aligned, make_track([shifted] * 50)) == 0.0

    def test_octave_error_forgiven(self):
        aligned = aligned_fixture(pitch=69)
        assert validate_alignment(aligned, make_track([880.0] * 50)) == 1.0

    def test_half_mismatch_scores_half(self):
        aligned = aligned_fixture(pitch=69)
        freqs = [440.0] * 25 + [440.0 * 2 ** (300 / 1200)] * 25
        assert validate_alignment(aligned, make_track(freqs)) == pytest.approx(0.5, abs=0.02)

    def test_no_voiced_frames_inside_notes_is_undefined(self):
        aligned = aligned_fixture(onset=10.0, offset=11.0)  # far past the track
        with pytest.raises(UndefinedScoreError):
            validate_alignment(aligned, make_track([440.0] * 10))

    def test_unvoiced_everywhere_is_undefined(self):
        with pytest.raises(UndefinedScoreError):
            validate_alignment(aligned_fixture(), make_track([0.0] * 10))
