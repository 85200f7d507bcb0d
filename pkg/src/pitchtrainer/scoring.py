"""Per-note segmentation of the pitch stream and the three trial metrics.

Metrics: absolute pitch deviation in cents (raw and with the median offset
removed, so a uniformly transposed performance is not penalized), contour
direction accuracy over consecutive note pairs, and mean onset error in ms.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dsp import PitchFrame
from .melody import MelodyTrack, hz_to_midi

VOICED_FRACTION_MIN = 0.3
ONSET_SEARCH_EARLY_MS = 150.0
CONTOUR_FLAT_BAND_CENTS = 50.0


@dataclass(frozen=True)
class NotePerformance:
    note_index: int
    target_midi: float
    sung_midi: float | None
    sung_onset_ms: float | None
    voiced_fraction: float

    @property
    def scored(self) -> bool:
        return self.sung_midi is not None


@dataclass(frozen=True)
class ScoreReport:
    pitch_deviation_cents: float
    pitch_deviation_transposed_cents: float
    contour_accuracy: float
    rhythm_error_ms: float
    notes: tuple[NotePerformance, ...] = ()
    scored_note_count: int = 0

    def to_dict(self) -> dict:
        return {
            "pitch_deviation_cents": self.pitch_deviation_cents,
            "pitch_deviation_transposed_cents": self.pitch_deviation_transposed_cents,
            "contour_accuracy": self.contour_accuracy,
            "rhythm_error_ms": self.rhythm_error_ms,
            "scored_note_count": self.scored_note_count,
            "notes": [
                {
                    "note_index": n.note_index,
                    "target_midi": n.target_midi,
                    "sung_midi": n.sung_midi,
                    "sung_onset_ms": n.sung_onset_ms,
                    "voiced_fraction": n.voiced_fraction,
                }
                for n in self.notes
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreReport":
        return cls(
            pitch_deviation_cents=d["pitch_deviation_cents"],
            pitch_deviation_transposed_cents=d["pitch_deviation_transposed_cents"],
            contour_accuracy=d["contour_accuracy"],
            rhythm_error_ms=d["rhythm_error_ms"],
            scored_note_count=d["scored_note_count"],
            notes=tuple(
                NotePerformance(
                    note_index=n["note_index"],
                    target_midi=n["target_midi"],
                    sung_midi=n["sung_midi"],
                    sung_onset_ms=n["sung_onset_ms"],
                    voiced_fraction=n["voiced_fraction"],
                )
                for n in d.get("notes", [])
            ),
        )


def segment_notes(frames: Sequence[PitchFrame], melody: MelodyTrack) -> list[NotePerformance]:
    """Assign frames to note windows and summarize each note's rendition."""
    performances = []
    for i, note in enumerate(melody.notes):
        in_window = [f for f in frames if note.onset_ms <= f.t_ms < note.offset_ms]
        voiced = [f for f in in_window if f.voiced]
        fraction = len(voiced) / len(in_window) if in_window else 0.0

        sung_midi = None
        if in_window and fraction >= VOICED_FRACTION_MIN:
            sung_midi = statistics.median(hz_to_midi(f.f0_hz) for f in voiced)

        sung_onset = None
        for f in frames:
            if f.voiced and note.onset_ms - ONSET_SEARCH_EARLY_MS <= f.t_ms < note.offset_ms:
                sung_onset = f.t_ms
                break

        performances.append(
            NotePerformance(
                note_index=i,
                target_midi=note.pitch_midi,
                sung_midi=sung_midi,
                sung_onset_ms=sung_onset,
                voiced_fraction=fraction,
            )
        )
    return performances


def pitch_deviation(notes: Iterable[NotePerformance]) -> tuple[float, float]:
    """(raw mean |error|, mean |error - median error|), both in cents."""
    errors = [
        100.0 * (n.sung_midi - n.target_midi) for n in notes if n.scored
    ]
    if not errors:
        return 0.0, 0.0
    raw = sum(abs(e) for e in errors) / len(errors)
    med = statistics.median(errors)
    transposed = sum(abs(e - med) for e in errors) / len(errors)
    return raw, transposed


def _direction(delta_cents: float) -> int:
    if abs(delta_cents) <= CONTOUR_FLAT_BAND_CENTS:
        return 0
    return 1 if delta_cents > 0 else -1


def contour_accuracy(notes: Sequence[NotePerformance]) -> float:
    """Fraction of consecutive scored-note pairs whose interval direction matches."""
    matches = comparable = 0
    for a, b in zip(notes, notes[1:]):
        if not (a.scored and b.scored):
            continue
        comparable += 1
        sung = _direction(100.0 * (b.sung_midi - a.sung_midi))
        target = _direction(100.0 * (b.target_midi - a.target_midi))
        if sung == target:
            matches += 1
    if comparable == 0:
        return 1.0
    return matches / comparable


def rhythm_precision(notes: Iterable[NotePerformance], melody: MelodyTrack) -> float:
    """Mean absolute onset error over notes with a detected onset, in ms."""
    errors = [
        abs(n.sung_onset_ms - melody.notes[n.note_index].onset_ms)
        for n in notes
        if n.sung_onset_ms is not None
    ]
    if not errors:
        return 0.0
    return sum(errors) / len(errors)


def score_trial(frames: Sequence[PitchFrame], melody: MelodyTrack) -> ScoreReport:
    notes = segment_notes(frames, melody)
    raw, transposed = pitch_deviation(notes)
    return ScoreReport(
        pitch_deviation_cents=raw,
        pitch_deviation_transposed_cents=transposed,
        contour_accuracy=contour_accuracy(notes),
        rhythm_error_ms=rhythm_precision(notes, melody),
        notes=tuple(notes),
        scored_note_count=sum(1 for n in notes if n.scored),
    )
