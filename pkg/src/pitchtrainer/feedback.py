"""Trial state machine: two feedback timing modes over a shared event timeline.

Synchronous mode feeds back during phonation (visual overlay each frame,
haptics on actuator change or a 250 ms refresh); terminal mode withholds
everything until the segment ends, then delivers the summary bundle.
Trigger markers 0x01/0x02 bracket every trial for external sync.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .dsp import PitchFrame
from .haptics import ActuatorLayout, HapticFrame, map_pitch_to_actuator, terminal_summary_pattern
from .melody import MelodyTrack, PitchPoint, hz_to_midi
from .scoring import ScoreReport

TRIGGER_START = 0x01
TRIGGER_END = 0x02
HAPTIC_REFRESH_MS = 250.0
LIVE_HAPTIC_INTENSITY = 0.8
LIVE_HAPTIC_DURATION_MS = 250


class FeedbackMode(enum.Enum):
    SYNCHRONOUS = "sync"
    TERMINAL = "terminal"


class Channel(enum.Enum):
    AUDITORY = "auditory"
    VISUAL = "visual"
    HAPTIC = "haptic"
    TRIGGER = "trigger"


class Phase(enum.Enum):
    IDLE = "idle"
    PHONATING = "phonating"
    FINALIZING = "finalizing"
    DONE = "done"


class TrialStateError(RuntimeError):
    """Operation attempted in an illegal trial phase."""


@dataclass(frozen=True)
class FeedbackEvent:
    t_ms: float
    channel: Channel
    payload: Any
    mode: FeedbackMode


def align(events: list[FeedbackEvent]) -> list[FeedbackEvent]:
    """Stable time sort; equal timestamps keep their emission order."""
    return sorted(events, key=lambda e: e.t_ms)


@dataclass
class TrialMachine:
    """One trial = one machine; feed it pitch frames, collect emitted events."""

    melody: MelodyTrack
    mode: FeedbackMode
    layout: ActuatorLayout = field(default_factory=ActuatorLayout)
    phase: Phase = Phase.IDLE
    segment_start_ms: float | None = None
    segment_end_ms: float | None = None
    _last_actuator: int | None = None
    _last_haptic_ms: float | None = None
    _last_frame_ms: float | None = None

    def start_trial(self, t_ms: float = 0.0) -> list[FeedbackEvent]:
        if self.phase is not Phase.IDLE:
            raise TrialStateError(f"start_trial in phase {self.phase.value}")
        self.phase = Phase.PHONATING
        self.segment_start_ms = t_ms
        events = [FeedbackEvent(t_ms, Channel.TRIGGER, TRIGGER_START, self.mode)]
        if self.mode is FeedbackMode.SYNCHRONOUS:
            events.append(FeedbackEvent(t_ms, Channel.AUDITORY, "target_melody", self.mode))
        return events

    def on_pitch_frame(self, frame: PitchFrame) -> list[FeedbackEvent]:
        if self.phase is not Phase.PHONATING:
            raise TrialStateError(f"pitch frame in phase {self.phase.value}")
        if frame.t_ms < self.segment_start_ms:
            raise TrialStateError(
                f"frame at {frame.t_ms} ms precedes segment start {self.segment_start_ms} ms"
            )
        self._last_frame_ms = frame.t_ms
        if self.mode is FeedbackMode.TERMINAL:
            return []

        sung_midi = hz_to_midi(frame.f0_hz) if frame.voiced else None
        sung = PitchPoint(frame.t_ms, sung_midi)
        target = PitchPoint(frame.t_ms, self.melody.midi_at(frame.t_ms))
        events = [FeedbackEvent(frame.t_ms, Channel.VISUAL,
                                {"sung": sung, "target": target}, self.mode)]

        if sung_midi is not None:
            actuator = map_pitch_to_actuator(sung_midi, self.layout)
            refresh_due = (
                self._last_haptic_ms is None
                or frame.t_ms - self._last_haptic_ms >= HAPTIC_REFRESH_MS
            )
            if actuator != self._last_actuator or refresh_due:
                events.append(
                    FeedbackEvent(
                        frame.t_ms,
                        Channel.HAPTIC,
                        HapticFrame(frame.t_ms, actuator, LIVE_HAPTIC_INTENSITY,
                                    LIVE_HAPTIC_DURATION_MS),
                        self.mode,
                    )
                )
                self._last_actuator = actuator
                self._last_haptic_ms = frame.t_ms
        return events

    def end_segment(self, score: ScoreReport, t_ms: float | None = None) -> list[FeedbackEvent]:
        if self.phase is not Phase.PHONATING:
            raise TrialStateError(f"end_segment in phase {self.phase.value}")
        self.phase = Phase.FINALIZING
        if t_ms is None:
            t_ms = self._last_frame_ms if self._last_frame_ms is not None else self.segment_start_ms
        self.segment_end_ms = t_ms

        events = [FeedbackEvent(t_ms, Channel.TRIGGER, TRIGGER_END, self.mode)]
        if self.mode is FeedbackMode.TERMINAL:
            events.append(FeedbackEvent(t_ms, Channel.AUDITORY, "confirmation", self.mode))
        events.append(FeedbackEvent(t_ms, Channel.VISUAL, {"score": score}, self.mode))
        if self.mode is FeedbackMode.TERMINAL:
            for pulse in terminal_summary_pattern(score, self.layout, start_ms=t_ms):
                events.append(FeedbackEvent(pulse.t_ms, Channel.HAPTIC, pulse, self.mode))
        self.phase = Phase.DONE
        return events
