import json

import numpy as np
import pytest

from pitchtrainer.melody import MelodyTrack, Note, load_melody, midi_to_hz


def make_fixture_melody(n_notes=12, note_ms=400.0, gap_ms=200.0):
    """Up-down scale with rests long enough for clean onset detection."""
    midis = [60, 62, 64, 65, 67, 69, 67, 65, 64, 62, 60, 62][:n_notes]
    notes = tuple(
        Note(onset_ms=i * (note_ms + gap_ms), duration_ms=note_ms, pitch_midi=m)
        for i, m in enumerate(midis)
    )
    return MelodyTrack("fixture-scale", notes, "12-note test scale")


def render_melody(melody, sr=10_000, midi_offset=0.0, onset_shift_ms=0.0,
                  amplitude=0.6, n_harmonics=8):
    """Sing the melody as sawtooth tones; silence in the rests."""
    total_s = (melody.span_ms + abs(onset_shift_ms) + 100) / 1000.0
    n = int(total_s * sr)
    x = np.zeros(n)
    t = np.arange(n) / sr
    for note in melody.notes:
        f = midi_to_hz(note.pitch_midi + midi_offset)
        lo = int((note.onset_ms + onset_shift_ms) / 1000.0 * sr)
        hi = int((note.offset_ms + onset_shift_ms) / 1000.0 * sr)
        lo, hi = max(lo, 0), min(hi, n)
        seg = sum(np.sin(2 * np.pi * k * f * t[lo:hi]) / k
                  for k in range(1, n_harmonics + 1))
        x[lo:hi] = amplitude * seg / np.max(np.abs(seg))
    return x


@pytest.fixture
def fixture_melody():
    return make_fixture_melody()


@pytest.fixture
def fixture_melody_json(fixture_melody, tmp_path):
    from pitchtrainer.melody import dump_melody

    path = tmp_path / "scale.json"
    path.write_text(dump_melody(fixture_melody))
    return path
