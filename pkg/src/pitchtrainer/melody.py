"""Target melody model and pitch-unit conversions.

Pitch lives in real-valued MIDI note numbers (A4 = 69) and deviations in
cents; both are logarithmic in frequency, which is what scoring and the
actuator mapping want.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

MAX_TRACK_SPAN_MS = 120_000.0


class MelodyError(ValueError):
    """Bad melody data: parse failure or invariant violation."""


def hz_to_midi(f_hz: float) -> float:
    """Convert frequency in Hz to a real-valued MIDI note number."""
    if f_hz <= 0:
        raise ValueError(f"frequency must be positive, got {f_hz}")
    return 69.0 + 12.0 * math.log2(f_hz / 440.0)


def midi_to_hz(midi: float) -> float:
    return 440.0 * 2.0 ** ((midi - 69.0) / 12.0)


def cents_between(f_a: float, f_b: float) -> float:
    """Signed interval from f_b up to f_a, in cents (1200 per octave)."""
    if f_a <= 0 or f_b <= 0:
        raise ValueError(f"frequencies must be positive, got {f_a}, {f_b}")
    return 1200.0 * math.log2(f_a / f_b)


@dataclass(frozen=True)
class Note:
    onset_ms: float
    duration_ms: float
    pitch_midi: float

    def __post_init__(self):
        # normalize to float so serialized tracks roundtrip exactly
        object.__setattr__(self, "onset_ms", float(self.onset_ms))
        object.__setattr__(self, "duration_ms", float(self.duration_ms))
        object.__setattr__(self, "pitch_midi", float(self.pitch_midi))
        if self.duration_ms <= 0:
            raise MelodyError(f"note duration must be > 0, got {self.duration_ms}")

    @property
    def offset_ms(self) -> float:
        return self.onset_ms + self.duration_ms

    def contains(self, t_ms: float) -> bool:
        # half-open window [onset, offset)
        return self.onset_ms <= t_ms < self.offset_ms


@dataclass(frozen=True)
class MelodyTrack:
    id: str
    notes: tuple[Note, ...]
    description: str = ""

    def __post_init__(self):
        if not self.notes:
            raise MelodyError("melody must contain at least one note")
        for i, (a, b) in enumerate(zip(self.notes, self.notes[1:])):
            if b.onset_ms < a.onset_ms:
                raise MelodyError(
                    f"notes out of order: note {i + 1} onset {b.onset_ms} "
                    f"before note {i} onset {a.onset_ms}"
                )
            if b.onset_ms < a.offset_ms:
                raise MelodyError(
                    f"overlapping notes: note {i} ends at {a.offset_ms}, "
                    f"note {i + 1} starts at {b.onset_ms}"
                )
        if self.span_ms >= MAX_TRACK_SPAN_MS:
            raise MelodyError(f"melody span {self.span_ms} ms exceeds desk scale")

    @property
    def span_ms(self) -> float:
        return self.notes[-1].offset_ms

    def midi_at(self, t_ms: float) -> float | None:
        """Target pitch at time t, or None in a gap/after the end."""
        for note in self.notes:
            if note.contains(t_ms):
                return note.pitch_midi
            if note.onset_ms > t_ms:
                break
        return None


@dataclass(frozen=True)
class PitchPoint:
    t_ms: float
    midi: float | None  # None = rest / unvoiced


def load_melody(text: str) -> MelodyTrack:
    """Parse a melody JSON document into a validated MelodyTrack."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise MelodyError(f"melody parse error at line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise MelodyError("melody file must contain a JSON object")
    try:
        raw_notes = doc["notes"]
    except KeyError:
        raise MelodyError("melody file missing 'notes'") from None
    notes = []
    for i, n in enumerate(raw_notes):
        try:
            notes.append(
                Note(
                    onset_ms=float(n["onset_ms"]),
                    duration_ms=float(n["duration_ms"]),
                    pitch_midi=float(n["midi"]),
                )
            )
        except (KeyError, TypeError) as e:
            raise MelodyError(f"bad note at index {i}: {e}") from e
    return MelodyTrack(
        id=str(doc.get("id", "")),
        notes=tuple(notes),
        description=str(doc.get("description", "")),
    )


def dump_melody(track: MelodyTrack) -> str:
    return json.dumps(
        {
            "id": track.id,
            "description": track.description,
            "notes": [
                {"onset_ms": n.onset_ms, "duration_ms": n.duration_ms, "midi": n.pitch_midi}
                for n in track.notes
            ],
        }
    )


def target_curve(melody: MelodyTrack, hop_ms: float) -> list[PitchPoint]:
    """Sample the melody piecewise-constant on the hop grid over [0, last offset]."""
    if hop_ms <= 0:
        raise ValueError(f"hop_ms must be positive, got {hop_ms}")
    n_points = int(math.floor(melody.span_ms / hop_ms)) + 1
    return [
        PitchPoint(t_ms=k * hop_ms, midi=melody.midi_at(k * hop_ms))
        for k in range(n_points)
    ]
