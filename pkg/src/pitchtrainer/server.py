"""HTTP + websocket surface for the companion UI.

Endpoints: GET /melodies, /sessions, /sessions/{id}/log, /sessions/{id}/score,
plus the full-duplex /live channel carrying one JSON control or stream
message per websocket text frame (newline-delimited when transported as a
byte stream).
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from .audio import ingest_wav
from .dsp import DspConfig, track_pitch, smooth_pitch
from .feedback import FeedbackMode, Phase, TrialMachine, TrialStateError
from .haptics import ActuatorLayout
from .melody import MelodyError, load_melody
from .pipeline import EPOCH_UTC, stable_session_id
from .scoring import score_trial
from .session import SessionLog, _record_to_json

UI_BUFFER_LIMIT = 4096


class BoundedStreamBuffer:
    """Outgoing UI buffer: oldest pitch_frame messages drop under backpressure,
    everything else is always retained."""

    def __init__(self, limit: int = UI_BUFFER_LIMIT):
        self.limit = limit
        self._items: deque[dict] = deque()
        self.dropped = 0

    def push(self, msg: dict) -> None:
        self._items.append(msg)
        if len(self._items) > self.limit:
            for i, item in enumerate(self._items):
                if item["type"] == "pitch_frame":
                    del self._items[i]
                    self.dropped += 1
                    return
            # nothing droppable: grow past the limit rather than lose a
            # feedback/trigger/state/score message

    def drain(self) -> list[dict]:
        items = list(self._items)
        self._items.clear()
        return items

    def __len__(self) -> int:
        return len(self._items)


class LiveTrial:
    """Server-side trial: staged version of the offline pipeline."""

    def __init__(self, melody, mode: FeedbackMode, cfg: DspConfig, layout: ActuatorLayout,
                 wav_bytes: bytes):
        self.cfg = cfg
        self.machine = TrialMachine(melody=melody, mode=mode, layout=layout)
        self.session_id = stable_session_id(wav_bytes, melody, mode, cfg)
        self.log = SessionLog(
            session_id=self.session_id,
            created_utc=EPOCH_UTC,
            melody=melody,
            mode=mode,
            dsp_config=cfg,
            layout=layout,
        )
        self.samples = ingest_wav(wav_bytes)
        self.frames = []

    def start(self, buffer: BoundedStreamBuffer) -> None:
        for event in self.machine.start_trial(t_ms=0.0):
            self.log.append_event(event)
            buffer.push({"type": "feedback_event", **_record_to_json(event)})
        buffer.push({"type": "trial_state", "phase": Phase.PHONATING.value})
        self.frames = track_pitch(self.samples, self.cfg)
        for frame in self.frames:
            self.log.append_event(frame)
            buffer.push({"type": "pitch_frame", **_record_to_json(frame)})
            for event in self.machine.on_pitch_frame(frame):
                self.log.append_event(event)
                buffer.push({"type": "feedback_event", **_record_to_json(event)})

    def stop(self, buffer: BoundedStreamBuffer, data_dir: Path) -> None:
        t_end = self.frames[-1].t_ms if self.frames else 0.0
        score = score_trial(smooth_pitch(self.frames), self.machine.melody)
        end_events = self.machine.end_segment(score, t_ms=t_end)
        for event in end_events:
            self.log.append_event(event)
            buffer.push({"type": "feedback_event", **_record_to_json(event)})
        self.log.append_score(score, t_ms=max(e.t_ms for e in end_events))
        (data_dir / f"{self.session_id}.jsonl").write_text(self.log.dumps())
        buffer.push({"type": "score_report", "session_id": self.session_id,
                     "score": score.to_dict()})
        buffer.push({"type": "trial_state", "phase": Phase.DONE.value})


def create_app(
    data_dir: str | Path,
    melody_dir: str | Path | None = None,
    cfg: DspConfig | None = None,
    layout: ActuatorLayout | None = None,
) -> FastAPI:
    data_dir = Path(data_dir)
    melody_dir = Path(melody_dir) if melody_dir else data_dir / "melodies"
    cfg = cfg or DspConfig()
    layout = layout or ActuatorLayout()
    app = FastAPI(title="pitchtrainer")

    def melody_index() -> dict[str, Path]:
        if not melody_dir.is_dir():
            return {}
        index = {}
        for path in sorted(melody_dir.glob("*.json")):
            try:
                track = load_melody(path.read_text())
            except MelodyError:
                continue
            index[track.id or path.stem] = path
        return index

    @app.get("/melodies")
    def melodies():
        out = []
        for mid, path in melody_index().items():
            doc = json.loads(path.read_text())
            doc["id"] = doc.get("id") or mid
            out.append(doc)
        return out

    @app.get("/sessions")
    def sessions():
        if not data_dir.is_dir():
            return []
        return sorted(p.stem for p in data_dir.glob("*.jsonl"))

    def session_path(session_id: str) -> Path:
        path = data_dir / f"{session_id}.jsonl"
        if "/" in session_id or not path.is_file():
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return path

    @app.get("/sessions/{session_id}/log", response_class=PlainTextResponse)
    def session_log(session_id: str):
        return session_path(session_id).read_text()

    @app.get("/sessions/{session_id}/score")
    def session_score(session_id: str):
        from .session import replay

        log = replay(session_path(session_id).read_text())
        if log.score is None:
            raise HTTPException(status_code=404, detail="session has no score")
        return log.score.to_dict()

    @app.websocket("/live")
    async def live(ws: WebSocket):
        await ws.accept()
        buffer = BoundedStreamBuffer()
        trial: LiveTrial | None = None
        greeted = False

        async def flush():
            for msg in buffer.drain():
                await ws.send_text(json.dumps(msg))

        try:
            while True:
                try:
                    msg = json.loads(await ws.receive_text())
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": "malformed control message"}))
                    continue
                mtype = msg.get("type")
                if not greeted and mtype != "hello":
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": "hello must come first"}))
                    continue
                if mtype == "hello":
                    greeted = True
                    buffer.push({"type": "trial_state", "phase": Phase.IDLE.value})
                elif mtype == "start_trial":
                    if trial is not None and trial.machine.phase is Phase.PHONATING:
                        buffer.push({"type": "error", "message": "trial already active"})
                        await flush()
                        continue
                    try:
                        melody_path = melody_index()[msg["melody_id"]]
                        melody = load_melody(melody_path.read_text())
                        mode = FeedbackMode(msg["mode"])
                        wav_path = msg.get("wav") or str(
                            data_dir / "audio" / f"{msg['melody_id']}.wav")
                        wav_bytes = Path(wav_path).read_bytes()
                        trial = LiveTrial(melody, mode, cfg, layout, wav_bytes)
                        trial.start(buffer)
                    except (KeyError, FileNotFoundError, MelodyError, ValueError) as e:
                        buffer.push({"type": "error", "message": f"cannot start trial: {e}"})
                elif mtype == "stop_trial":
                    if trial is None or trial.machine.phase is not Phase.PHONATING:
                        buffer.push({"type": "error", "message": "no active trial"})
                    else:
                        data_dir.mkdir(parents=True, exist_ok=True)
                        try:
                            trial.stop(buffer, data_dir)
                        except TrialStateError as e:
                            buffer.push({"type": "error", "message": str(e)})
                else:
                    buffer.push({"type": "error", "message": f"unknown type {mtype!r}"})
                await flush()
        except WebSocketDisconnect:
            return

    return app
