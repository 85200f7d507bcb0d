"""Desk-scale vocal pitch training engine.

Cepstral F0 tracking at 10 kHz, synchronous/terminal multimodal feedback,
a linear vibrotactile pitch display with a bit-exact wire protocol,
append-only session logs, trial scoring, and one-way ANOVA stats.
"""

from .dsp import DspConfig, PitchFrame
from .feedback import Channel, FeedbackEvent, FeedbackMode, TrialMachine
from .haptics import ActuatorLayout, HapticFrame
from .melody import MelodyTrack, Note, PitchPoint, load_melody
from .scoring import NotePerformance, ScoreReport, score_trial
from .session import SessionLog, replay
from .stats import AnovaResult, GroupedData, one_way_anova

__version__ = "0.1.0"
