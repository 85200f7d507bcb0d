"""Offline trial pipeline: samples -> pitch frames -> feedback -> log + score.

This is the deterministic spine shared by the CLI `run` command and the
live service: same inputs and config always produce byte-identical logs.
"""

from __future__ import annotations

import hashlib
from typing import IO, Callable

import numpy as np

from .dsp import DspConfig, track_pitch, smooth_pitch
from .feedback import Channel, FeedbackMode, TrialMachine
from .haptics import ActuatorLayout, encode_haptic_frame
from .melody import MelodyTrack
from .scoring import ScoreReport, score_trial
from .session import SessionLog

EPOCH_UTC = "1970-01-01T00:00:00Z"


def stable_session_id(wav_bytes: bytes, melody: MelodyTrack, mode: FeedbackMode,
                      cfg: DspConfig) -> str:
    h = hashlib.sha256()
    h.update(wav_bytes)
    h.update(melody.id.encode())
    h.update(mode.value.encode())
    h.update(repr(cfg).encode())
    return h.hexdigest()[:12]


def score_log(log: SessionLog) -> ScoreReport:
    """Re-score a (replayed) log exactly as the live pipeline did."""
    return score_trial(smooth_pitch(log.pitch_frames()), log.melody)


def run_trial(
    samples: np.ndarray,
    melody: MelodyTrack,
    mode: FeedbackMode,
    cfg: DspConfig | None = None,
    layout: ActuatorLayout | None = None,
    session_id: str = "trial",
    created_utc: str = EPOCH_UTC,
    sink: IO[str] | None = None,
    haptic_out: Callable[[bytes], None] | None = None,
    trigger_out: Callable[[bytes], None] | None = None,
) -> SessionLog:
    cfg = cfg or DspConfig()
    layout = layout or ActuatorLayout()
    log = SessionLog(
        session_id=session_id,
        created_utc=created_utc,
        melody=melody,
        mode=mode,
        dsp_config=cfg,
        layout=layout,
    )
    if sink is not None:
        log.attach_sink(sink)

    def emit(event):
        log.append_event(event)
        if event.channel is Channel.HAPTIC and haptic_out is not None:
            haptic_out(encode_haptic_frame(event.payload))
        if event.channel is Channel.TRIGGER and trigger_out is not None:
            trigger_out(bytes([event.payload]))

    machine = TrialMachine(melody=melody, mode=mode, layout=layout)
    for event in machine.start_trial(t_ms=0.0):
        emit(event)

    frames = track_pitch(samples, cfg)
    for frame in frames:
        log.append_event(frame)
        for event in machine.on_pitch_frame(frame):
            emit(event)

    t_end = frames[-1].t_ms if frames else 0.0
    score = score_trial(smooth_pitch(frames), melody)
    end_events = machine.end_segment(score, t_ms=t_end)
    for event in end_events:
        emit(event)
    log.append_score(score, t_ms=max(e.t_ms for e in end_events))
    return log
