"""Append-only session logs (.jsonl) plus questionnaire and HbO ingestion.

Line 1 is a header object with session metadata and the config snapshot;
every following line is one record: {"t_ms", "kind", ...}. Floats are
serialized with Python's shortest round-trip repr, so write-then-replay
is bit-exact and re-scoring a replayed trial reproduces the stored report.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, asdict
from typing import IO, Any, Iterable

from .dsp import DspConfig, PitchFrame
from .feedback import Channel, FeedbackEvent, FeedbackMode
from .haptics import ActuatorLayout, HapticFrame
from .melody import MelodyTrack, PitchPoint, dump_melody, load_melody
from .scoring import ScoreReport


class SessionLogError(ValueError):
    pass


class OrderingError(SessionLogError):
    """Record timestamp went backwards."""


@dataclass
class SessionLog:
    session_id: str
    created_utc: str
    melody: MelodyTrack
    mode: FeedbackMode
    dsp_config: DspConfig = field(default_factory=DspConfig)
    layout: ActuatorLayout = field(default_factory=ActuatorLayout)
    records: list[dict] = field(default_factory=list)
    score: ScoreReport | None = None
    _sink: IO[str] | None = None
    _last_t_ms: float | None = None

    # ---- construction ----

    def header(self) -> dict:
        return {
            "session_id": self.session_id,
            "created_utc": self.created_utc,
            "melody_id": self.melody.id,
            "melody": json.loads(dump_melody(self.melody)),
            "mode": self.mode.value,
            "dsp_config": asdict(self.dsp_config),
            "layout": asdict(self.layout),
        }

    def attach_sink(self, sink: IO[str]) -> None:
        """Start writing to an empty file-like; writes the header immediately."""
        self._sink = sink
        sink.write(json.dumps(self.header()) + "\n")
        sink.flush()

    def append_event(self, record: PitchFrame | FeedbackEvent) -> None:
        obj = _record_to_json(record)
        self._append(obj)

    def append_score(self, score: ScoreReport, t_ms: float) -> None:
        self.score = score
        self._append({"t_ms": t_ms, "kind": "segment", "score": score.to_dict()})

    def _append(self, obj: dict) -> None:
        t = obj["t_ms"]
        if self._last_t_ms is not None and t < self._last_t_ms:
            raise OrderingError(
                f"timestamp regression: {t} ms after {self._last_t_ms} ms"
            )
        self._last_t_ms = t
        self.records.append(obj)
        if self._sink is not None:
            self._sink.write(json.dumps(obj) + "\n")
            self._sink.flush()

    # ---- views ----

    def pitch_frames(self) -> list[PitchFrame]:
        return [
            PitchFrame(r["t_ms"], r["f0_hz"], r["confidence"], r["rms"])
            for r in self.records
            if r["kind"] == "pitch"
        ]

    def feedback_events(self) -> list[FeedbackEvent]:
        out = []
        for r in self.records:
            if r["kind"] == "feedback":
                out.append(FeedbackEvent(r["t_ms"], Channel(r["channel"]),
                                         r["payload"], FeedbackMode(r["mode"])))
            elif r["kind"] == "trigger":
                out.append(FeedbackEvent(r["t_ms"], Channel.TRIGGER,
                                         r["code"], FeedbackMode(r["mode"])))
        return out

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(json.dumps(self.header()) + "\n")
        for r in self.records:
            buf.write(json.dumps(r) + "\n")
        return buf.getvalue()


def _payload_to_json(channel: Channel, payload: Any) -> Any:
    if channel is Channel.VISUAL:
        out = {}
        for key, value in payload.items():
            if isinstance(value, PitchPoint):
                out[key] = {"t_ms": value.t_ms, "midi": value.midi}
            elif isinstance(value, ScoreReport):
                out[key] = value.to_dict()
            else:
                out[key] = value
        return out
    if channel is Channel.HAPTIC and isinstance(payload, HapticFrame):
        return {
            "t_ms": payload.t_ms,
            "actuator": payload.actuator,
            "intensity": payload.intensity,
            "duration_ms": payload.duration_ms,
        }
    return payload


def _record_to_json(record: PitchFrame | FeedbackEvent) -> dict:
    if isinstance(record, PitchFrame):
        return {
            "t_ms": record.t_ms,
            "kind": "pitch",
            "f0_hz": record.f0_hz,
            "confidence": record.confidence,
            "rms": record.rms,
        }
    if isinstance(record, FeedbackEvent):
        if record.channel is Channel.TRIGGER:
            return {
                "t_ms": record.t_ms,
                "kind": "trigger",
                "code": record.payload,
                "mode": record.mode.value,
            }
        return {
            "t_ms": record.t_ms,
            "kind": "feedback",
            "channel": record.channel.value,
            "payload": _payload_to_json(record.channel, record.payload),
            "mode": record.mode.value,
        }
    raise TypeError(f"unsupported record type {type(record).__name__}")


def replay(text: str) -> SessionLog:
    """Reconstruct a SessionLog from file content, validating per line."""
    lines = text.splitlines()
    if not lines:
        raise SessionLogError("empty log file: missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise SessionLogError(f"malformed header at line 1: {e.msg}") from e

    log = SessionLog(
        session_id=header["session_id"],
        created_utc=header["created_utc"],
        melody=load_melody(json.dumps(header["melody"])),
        mode=FeedbackMode(header["mode"]),
        dsp_config=DspConfig(**header["dsp_config"]),
        layout=ActuatorLayout(**header["layout"]),
    )
    last_t = None
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise SessionLogError(f"malformed record at line {lineno}: {e.msg}") from e
        if "t_ms" not in obj or "kind" not in obj:
            raise SessionLogError(f"record at line {lineno} missing t_ms/kind")
        if last_t is not None and obj["t_ms"] < last_t:
            raise OrderingError(
                f"corrupt log: timestamp regression at line {lineno}"
            )
        last_t = obj["t_ms"]
        if obj["kind"] == "segment":
            log.score = ScoreReport.from_dict(obj["score"])
        log.records.append(obj)
        log._last_t_ms = obj["t_ms"]
    return log


# ---- questionnaire ingestion ----

DEFAULT_SCALE_BOUNDS = {"GEQ": (1.0, 5.0), "IMI": (1.0, 7.0)}


@dataclass(frozen=True)
class QuestionnaireRow:
    participant_id: str
    condition: str
    instrument: str
    items: tuple[float, ...]

    @property
    def mean(self) -> float:
        return sum(self.items) / len(self.items)


def ingest_questionnaire(
    csv_text: str,
    scale_bounds: dict[str, tuple[float, float]] | None = None,
) -> tuple[list[QuestionnaireRow], dict[tuple[str, str, str], float]]:
    """Parse questionnaire CSV; returns rows and per (participant, condition,
    instrument) subscale means."""
    bounds = scale_bounds or DEFAULT_SCALE_BOUNDS
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise SessionLogError("questionnaire CSV is empty") from None
    expected_prefix = ["participant_id", "condition", "instrument"]
    if header[:3] != expected_prefix:
        raise SessionLogError(
            f"questionnaire header must start with {expected_prefix}, got {header[:3]}"
        )
    rows = []
    for rowno, raw in enumerate(reader, start=2):
        if not raw:
            continue
        pid, condition, instrument = raw[0], raw[1], raw[2]
        if instrument not in bounds:
            raise SessionLogError(f"row {rowno}: unknown instrument {instrument!r}")
        lo, hi = bounds[instrument]
        try:
            items = tuple(float(v) for v in raw[3:])
        except ValueError as e:
            raise SessionLogError(f"row {rowno}: non-numeric item score") from e
        if not items:
            raise SessionLogError(f"row {rowno}: no item scores")
        for v in items:
            if not (lo <= v <= hi):
                raise SessionLogError(
                    f"row {rowno}: item score {v} outside {instrument} scale [{lo}, {hi}]"
                )
        rows.append(QuestionnaireRow(pid, condition, instrument, items))
    means = {(r.participant_id, r.condition, r.instrument): r.mean for r in rows}
    return rows, means


def ingest_hbo(csv_text: str) -> list[tuple[float, tuple[float, ...]]]:
    """Parse HbO CSV (t_ms,ch1,ch2,...) into a time-sorted channel series."""
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise SessionLogError("HbO CSV is empty") from None
    if not header or header[0] != "t_ms":
        raise SessionLogError("HbO CSV must start with a t_ms column")
    series = []
    last_t = None
    for rowno, raw in enumerate(reader, start=2):
        if not raw:
            continue
        try:
            t = float(raw[0])
        except ValueError as e:
            raise SessionLogError(f"row {rowno}, column 1: non-numeric time") from e
        if last_t is not None and t < last_t:
            raise SessionLogError(f"row {rowno}: non-monotone time {t}")
        last_t = t
        values = []
        for col, cell in enumerate(raw[1:], start=2):
            try:
                values.append(float(cell))
            except ValueError as e:
                raise SessionLogError(
                    f"row {rowno}, column {col}: non-numeric cell {cell!r}"
                ) from e
        series.append((t, tuple(values)))
    return series
