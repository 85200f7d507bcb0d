import pytest
from hypothesis import given, strategies as st

from pitchtrainer.dsp import PitchFrame
from pitchtrainer.melody import MelodyTrack, Note, midi_to_hz
from pitchtrainer.scoring import (
    NotePerformance,
    contour_accuracy,
    pitch_deviation,
    rhythm_precision,
    score_trial,
    segment_notes,
)

# 150 ms rests between notes so the early onset-search window of one note
# never reaches into the voicing of the previous one
MELODY = MelodyTrack("scale", tuple(
    Note(onset_ms=500 * i, duration_ms=350, pitch_midi=60 + i) for i in range(5)
))


def perf(idx, target, sung, onset=None, fraction=1.0):
    return NotePerformance(idx, target, sung, onset, fraction)


def frames_for(melody, midi_offset=0.0, onset_shift_ms=0.0, hop_ms=10.0, voiced_pattern=None):
    """Synthesize a frame stream singing the melody with the given distortions."""
    frames = []
    span = melody.span_ms + 100
    k = 0
    t = 0.0
    while t <= span:
        target = melody.midi_at(t - onset_shift_ms)
        if target is not None and (voiced_pattern is None or voiced_pattern(k)):
            frames.append(PitchFrame(t, midi_to_hz(target + midi_offset), 1.0, 0.5))
        else:
            frames.append(PitchFrame(t, None, 0.0, 0.0))
        t += hop_ms
        k += 1
    return frames


class TestSegmentNotes:
    def test_perfect_performance(self):
        notes = segment_notes(frames_for(MELODY), MELODY)
        assert len(notes) == 5
        for n, note in zip(notes, MELODY.notes):
            assert n.voiced_fraction == 1.0
            assert n.sung_midi == pytest.approx(note.pitch_midi)
            assert n.sung_onset_ms is not None

    def test_silent_stream(self):
        silent = [PitchFrame(10.0 * i, None, 0.0, 0.0) for i in range(200)]
        notes = segment_notes(silent, MELODY)
        assert all(n.sung_midi is None and n.sung_onset_ms is None for n in notes)
        assert all(n.voiced_fraction == 0.0 for n in notes)

    def test_half_voiced_note_still_scored(self):
        notes = segment_notes(frames_for(MELODY, voiced_pattern=lambda k: k % 2 == 0), MELODY)
        for n, note in zip(notes, MELODY.notes):
            assert n.voiced_fraction == pytest.approx(0.5, abs=0.05)
            assert n.sung_midi == pytest.approx(note.pitch_midi)

    def test_sparse_voicing_not_scored(self):
        notes = segment_notes(frames_for(MELODY, voiced_pattern=lambda k: k % 5 == 0), MELODY)
        assert all(n.sung_midi is None for n in notes)
        assert all(n.voiced_fraction == pytest.approx(0.2, abs=0.05) for n in notes)

    def test_empty_stream(self):
        notes = segment_notes([], MELODY)
        assert len(notes) == 5
        assert all(not n.scored for n in notes)

    def test_onset_found_in_early_window(self):
        # silence, then voicing starting 100 ms before note 1's nominal onset
        frames = [
            PitchFrame(10.0 * k, midi_to_hz(61.0) if 10.0 * k >= 400 else None,
                       1.0 if 10.0 * k >= 400 else 0.0, 0.5)
            for k in range(90)
        ]
        notes = segment_notes(frames, MELODY)
        assert notes[1].sung_onset_ms == pytest.approx(400.0)


class TestPitchDeviation:
    def test_all_zero(self):
        notes = [perf(i, 60, 60.0) for i in range(3)]
        assert pitch_deviation(notes) == (0.0, 0.0)

    def test_uniform_offset_removed_by_median(self):
        notes = [perf(i, 60 + i, 61.0 + i) for i in range(4)]
        raw, transposed = pitch_deviation(notes)
        assert raw == pytest.approx(100.0)
        assert transposed == pytest.approx(0.0)

    def test_hand_computed_mixed_errors(self):
        # e = (+100, 0, -100): median 0, raw = transposed = 200/3
        notes = [perf(0, 60, 61.0), perf(1, 62, 62.0), perf(2, 64, 63.0)]
        raw, transposed = pitch_deviation(notes)
        assert raw == pytest.approx(200.0 / 3)
        assert transposed == pytest.approx(200.0 / 3)

    def test_vacuous(self):
        assert pitch_deviation([perf(0, 60, None)]) == (0.0, 0.0)

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=8),
           st.floats(-12, 12))
    def test_transposition_invariance(self, errors, shift):
        base = [perf(i, 60.0, 60.0 + e) for i, e in enumerate(errors)]
        shifted = [perf(i, 60.0, 60.0 + e + shift) for i, e in enumerate(errors)]
        assert pitch_deviation(base)[1] == pytest.approx(pitch_deviation(shifted)[1], abs=1e-9)

    def test_transposed_never_exceeds_raw(self):
        notes = [perf(i, 60, 60.0 + d) for i, d in enumerate((0.3, -1.2, 2.0, 0.9))]
        raw, transposed = pitch_deviation(notes)
        assert transposed <= raw + 1e-9


class TestContourAccuracy:
    def test_exact_match(self):
        notes = [perf(i, 60 + i, 55.0 + i) for i in range(4)]
        assert contour_accuracy(notes) == 1.0

    def test_fully_inverted(self):
        # target (+200, -200); sung (-200, +200)
        notes = [perf(0, 60, 62.0), perf(1, 62, 60.0), perf(2, 60, 62.0)]
        assert contour_accuracy(notes) == 0.0

    def test_two_of_three_match(self):
        # target (+200, +200, -200); sung (+200, -200, -200)
        notes = [perf(0, 60, 60.0), perf(1, 62, 62.0), perf(2, 64, 60.0), perf(3, 62, 58.0)]
        assert contour_accuracy(notes) == pytest.approx(2 / 3)

    def test_flat_band(self):
        # 40-cent wobble is flat on both sides
        notes = [perf(0, 60, 60.0), perf(1, 60, 60.4)]
        assert contour_accuracy(notes) == 1.0

    def test_vacuous_single_note(self):
        assert contour_accuracy([perf(0, 60, 60.0)]) == 1.0

    def test_unscored_notes_excluded(self):
        notes = [perf(0, 60, 60.0), perf(1, 62, None), perf(2, 64, 64.0)]
        assert contour_accuracy(notes) == 1.0  # no comparable consecutive pair


class TestRhythmPrecision:
    def test_exact_onsets(self):
        notes = [perf(i, 60, 60.0, onset=MELODY.notes[i].onset_ms) for i in range(5)]
        assert rhythm_precision(notes, MELODY) == 0.0

    def test_uniform_shift(self):
        notes = [perf(i, 60, 60.0, onset=MELODY.notes[i].onset_ms + 50) for i in range(5)]
        assert rhythm_precision(notes, MELODY) == pytest.approx(50.0)

    def test_hand_computed_mixed(self):
        # onsets (+20, -40, missing): mean of |20|, |40| over 2 detected
        notes = [
            perf(0, 60, 60.0, onset=MELODY.notes[0].onset_ms + 20),
            perf(1, 61, 61.0, onset=MELODY.notes[1].onset_ms - 40),
            perf(2, 62, 62.0, onset=None),
        ]
        assert rhythm_precision(notes, MELODY) == pytest.approx(30.0)

    def test_vacuous(self):
        assert rhythm_precision([perf(0, 60, 60.0)], MELODY) == 0.0


class TestScoreTrial:
    def test_perfect_rendition(self):
        report = score_trial(frames_for(MELODY), MELODY)
        assert report.pitch_deviation_cents == pytest.approx(0.0, abs=1e-9)
        assert report.pitch_deviation_transposed_cents == pytest.approx(0.0, abs=1e-9)
        assert report.contour_accuracy == 1.0
        assert report.rhythm_error_ms == pytest.approx(0.0, abs=1e-9)
        assert report.scored_note_count == 5

    def test_transposed_rendition(self):
        report = score_trial(frames_for(MELODY, midi_offset=1.0), MELODY)
        assert report.pitch_deviation_cents == pytest.approx(100.0, abs=0.5)
        assert report.pitch_deviation_transposed_cents == pytest.approx(0.0, abs=0.5)
        assert report.contour_accuracy == 1.0

    def test_determinism(self):
        frames = frames_for(MELODY, midi_offset=0.3)
        assert score_trial(frames, MELODY) == score_trial(frames, MELODY)

    def test_roundtrip_dict(self):
        report = score_trial(frames_for(MELODY), MELODY)
        from pitchtrainer.scoring import ScoreReport

        assert ScoreReport.from_dict(report.to_dict()) == report
