"""Linear actuator array: pitch mapping, wire protocol, device simulator.

Wire frame is 6 bytes, hand-checkable:
    [0xA7][actuator u8][intensity u8][duration_ms u16 LE][xor checksum]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

MAGIC = 0xA7
FRAME_LEN = 6


class HapticProtocolError(ValueError):
    pass


class FramingError(HapticProtocolError):
    """First byte is not the frame magic."""


class ChecksumError(HapticProtocolError):
    """Payload corrupted in transit."""


@dataclass(frozen=True)
class ActuatorLayout:
    n_actuators: int = 18
    midi_lo: float = 48.0  # C3
    midi_hi: float = 72.0  # C5

    def __post_init__(self):
        if self.n_actuators < 2:
            raise ValueError("need at least 2 actuators")
        if not (self.midi_lo < self.midi_hi):
            raise ValueError("midi_lo must be below midi_hi")


@dataclass(frozen=True)
class HapticFrame:
    t_ms: float
    actuator: int
    intensity: float  # [0, 1]
    duration_ms: int  # 0..65535


def map_pitch_to_actuator(midi: float, layout: ActuatorLayout) -> int:
    """Linear pitch scale: position proportional to MIDI, clamped at the ends."""
    span = layout.midi_hi - layout.midi_lo
    idx = math.floor((midi - layout.midi_lo) / span * layout.n_actuators)
    return max(0, min(layout.n_actuators - 1, idx))


def encode_haptic_frame(frame: HapticFrame) -> bytes:
    if not (0 <= frame.actuator <= 255):
        raise HapticProtocolError(f"actuator {frame.actuator} not encodable in u8")
    if not (0 <= frame.duration_ms <= 65535):
        raise HapticProtocolError(f"duration {frame.duration_ms} ms not encodable in u16")
    intensity = round(frame.intensity * 255)
    if not (0 <= intensity <= 255):
        raise HapticProtocolError(f"intensity {frame.intensity} outside [0, 1]")
    body = bytes(
        [MAGIC, frame.actuator, intensity, frame.duration_ms & 0xFF, frame.duration_ms >> 8]
    )
    checksum = 0
    for b in body:
        checksum ^= b
    return body + bytes([checksum])


def decode_haptic_frame(data: bytes, t_ms: float = 0.0) -> HapticFrame:
    if len(data) != FRAME_LEN:
        raise HapticProtocolError(f"expected {FRAME_LEN} bytes, got {len(data)}")
    if data[0] != MAGIC:
        raise FramingError(f"bad magic byte 0x{data[0]:02X}")
    checksum = 0
    for b in data[:5]:
        checksum ^= b
    if checksum != data[5]:
        raise ChecksumError(f"checksum mismatch: computed 0x{checksum:02X}, got 0x{data[5]:02X}")
    return HapticFrame(
        t_ms=t_ms,
        actuator=data[1],
        intensity=data[2] / 255.0,
        duration_ms=data[3] | (data[4] << 8),
    )


SUMMARY_PULSE_MS = 200
SUMMARY_GAP_MS = 150
SUMMARY_INTENSITY = 0.8
SUMMARY_DEVIATION_CAP = 400.0


def terminal_summary_pattern(score, layout: ActuatorLayout,
                             start_ms: float = 0.0) -> list[HapticFrame]:
    """Three end-of-trial pulses; better accuracy lands higher on the array.

    `score` is a ScoreReport or a bare pitch deviation in cents.
    """
    deviation_cents = getattr(score, "pitch_deviation_cents", score)
    if not math.isfinite(deviation_cents):
        raise ValueError("deviation must be finite")
    frac = 1.0 - min(deviation_cents, SUMMARY_DEVIATION_CAP) / SUMMARY_DEVIATION_CAP
    idx = max(0, min(layout.n_actuators - 1, math.floor(frac * layout.n_actuators)))
    step = SUMMARY_PULSE_MS + SUMMARY_GAP_MS
    return [
        HapticFrame(t_ms=start_ms + i * step, actuator=idx,
                    intensity=SUMMARY_INTENSITY, duration_ms=SUMMARY_PULSE_MS)
        for i in range(3)
    ]


@dataclass
class DeviceSimulator:
    """Protocol-compatible stand-in for the actuator array.

    Feed it raw bytes; it reassembles frames and records every activation.
    One writer at a time (byte re-framing state is per-instance).
    """

    layout: ActuatorLayout = field(default_factory=ActuatorLayout)
    _buffer: bytearray = field(default_factory=bytearray)
    activations: list[HapticFrame] = field(default_factory=list)
    _clock_ms: float = 0.0

    def feed(self, data: bytes, t_ms: float | None = None) -> list[HapticFrame]:
        """Consume bytes, decoding every complete frame; returns new activations."""
        if t_ms is not None:
            self._clock_ms = t_ms
        self._buffer.extend(data)
        new: list[HapticFrame] = []
        while len(self._buffer) >= FRAME_LEN:
            chunk = bytes(self._buffer[:FRAME_LEN])
            del self._buffer[:FRAME_LEN]
            frame = decode_haptic_frame(chunk, t_ms=self._clock_ms)
            if frame.actuator >= self.layout.n_actuators:
                raise HapticProtocolError(
                    f"actuator {frame.actuator} outside layout of {self.layout.n_actuators}"
                )
            self.activations.append(frame)
            new.append(frame)
        return new

    def active(self, at_ms: float) -> list[tuple[int, float, float]]:
        """(actuator, intensity, remaining_ms) for activations still live at at_ms."""
        live = []
        for a in self.activations:
            remaining = a.t_ms + a.duration_ms - at_ms
            if a.t_ms <= at_ms and remaining > 0:
                live.append((a.actuator, a.intensity, remaining))
        return live

    def dump(self) -> str:
        """One line per recorded activation: `t_ms actuator intensity remaining_ms`."""
        lines = [
            f"{a.t_ms:g} {a.actuator} {a.intensity:.6g} {a.duration_ms}"
            for a in self.activations
        ]
        return "\n".join(lines) + ("\n" if lines else "")
