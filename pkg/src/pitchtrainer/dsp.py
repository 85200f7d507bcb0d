"""Streaming cepstral F0 estimation at 10 kHz.

The chain per frame: Hann window, magnitude spectrum, log with a 1e-10
floor, inverse FFT back to the real cepstrum, then a peak search over the
quefrency band corresponding to [f0_min, f0_max]. Voicing gates on frame
RMS and on cepstral peak prominence: the peak height above a linear
regression of the cepstrum across quefrency, in units of the robust (MAD)
spread of the detrended cepstrum. The prominence ratio is scale-invariant,
so the voiced decision depends on amplitude only through the RMS gate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class DspConfig:
    sample_rate_hz: int = 10_000
    frame_len: int = 512
    hop: int = 100  # samples; 10 ms at 10 kHz
    f0_min_hz: float = 80.0
    f0_max_hz: float = 600.0
    cpp_threshold: float = 5.5
    rms_gate: float = 0.01

    def __post_init__(self):
        if not (self.f0_min_hz < self.f0_max_hz):
            raise ValueError("f0_min_hz must be below f0_max_hz")
        if self.frame_len & (self.frame_len - 1) != 0 or self.frame_len <= 0:
            raise ValueError(f"frame_len must be a power of two, got {self.frame_len}")
        if self.hop > self.frame_len or self.hop <= 0:
            raise ValueError("hop must be in (0, frame_len]")

    @property
    def hop_ms(self) -> float:
        return self.hop * 1000.0 / self.sample_rate_hz

    def frame_time_ms(self, k: int) -> float:
        return (k * self.hop + self.frame_len / 2) * 1000.0 / self.sample_rate_hz


@dataclass(frozen=True)
class PitchFrame:
    t_ms: float
    f0_hz: float | None
    confidence: float
    rms: float

    @property
    def voiced(self) -> bool:
        return self.f0_hz is not None


def frame_stream(samples: Sequence[float] | np.ndarray, cfg: DspConfig) -> Iterator[np.ndarray]:
    """Yield overlapping frame_len frames every hop samples, zero-padding tails."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return
    last_start = ((n - 1) // cfg.hop) * cfg.hop
    for start in range(0, last_start + 1, cfg.hop):
        chunk = x[start : start + cfg.frame_len]
        if chunk.shape[0] < cfg.frame_len:
            chunk = np.pad(chunk, (0, cfg.frame_len - chunk.shape[0]))
        yield chunk


def _parabolic_peak(y: np.ndarray, i: int) -> tuple[float, float]:
    """Refine peak position/height at index i by fitting the 3-point parabola."""
    if i <= 0 or i >= len(y) - 1:
        return float(i), float(y[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(i), float(y1)
    delta = 0.5 * (y0 - y2) / denom
    return i + delta, y1 - 0.25 * (y0 - y2) * delta


def estimate_f0(frame: np.ndarray, cfg: DspConfig) -> tuple[float, float] | None:
    """Cepstral F0 for one frame; None when the frame is gated as unvoiced."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[0] != cfg.frame_len:
        raise ValueError(f"frame length {frame.shape[0]} != frame_len {cfg.frame_len}")

    rms = float(np.sqrt(np.mean(frame * frame)))
    if rms < cfg.rms_gate:
        return None

    windowed = frame * np.hanning(cfg.frame_len)
    spectrum = np.abs(np.fft.rfft(windowed))
    cepstrum = np.fft.irfft(np.log(spectrum + LOG_FLOOR), n=cfg.frame_len)

    sr = cfg.sample_rate_hz
    q_lo = int(np.ceil(sr / cfg.f0_max_hz))
    q_hi = int(np.floor(sr / cfg.f0_min_hz))
    if q_hi - q_lo + 1 < 3:
        return None

    # detrend across the usable quefrency range so the spectral-envelope
    # slope does not bias the peak-prominence measurement
    q_fit_hi = cfg.frame_len // 2
    q = np.arange(q_lo, q_fit_hi + 1)
    y = cepstrum[q_lo : q_fit_hi + 1]
    trend = np.polyval(np.polyfit(q, y, 1), q)
    resid = y - trend

    band = resid[: q_hi - q_lo + 1]
    i_rel = int(np.argmax(band))

    # rahmonic guard: a noisy frame can put the tallest peak at a multiple
    # of the true period; if a comparable peak sits at 1/m of the winning
    # quefrency, the shorter period is the fundamental
    peak_bin_h = float(band[i_rel])
    best = i_rel
    for m in (4, 3, 2):
        qc = round((i_rel + q_lo) / m) - q_lo
        if qc < 1:
            continue
        window = range(max(0, qc - 2), min(len(band), qc + 3))
        if not window:
            continue
        j = max(window, key=lambda idx: band[idx])
        if band[j] >= 0.5 * peak_bin_h:
            best = j
            break

    peak_q, peak_h = _parabolic_peak(resid, best)
    peak_q += q_lo
    peak_h = max(peak_h, peak_bin_h)

    mad = float(np.median(np.abs(resid - np.median(resid))))
    spread = 1.4826 * mad
    if spread <= 0.0:
        ratio = np.inf if peak_h > 0.0 else 0.0
    else:
        ratio = peak_h / spread
    if ratio < cfg.cpp_threshold:
        return None

    f0 = sr / peak_q
    f0 = min(max(f0, cfg.f0_min_hz), cfg.f0_max_hz)
    confidence = min(1.0, float(ratio) / (2.0 * cfg.cpp_threshold))
    return float(f0), confidence


def track_pitch(samples: Sequence[float] | np.ndarray, cfg: DspConfig | None = None) -> list[PitchFrame]:
    """Full utterance to per-hop PitchFrames (no smoothing).

    Zero-padded tail frames are kept in the stream but never voiced: with
    less than a full window of real signal the cepstral peak is unreliable
    (a truncated low-pitch period can alias to a confident bogus peak).
    """
    cfg = cfg or DspConfig()
    n = np.asarray(samples).shape[0]
    frames = []
    for k, frame in enumerate(frame_stream(samples, cfg)):
        rms = float(np.sqrt(np.mean(frame * frame)))
        partial = k * cfg.hop + cfg.frame_len > n
        est = None if partial else estimate_f0(frame, cfg)
        if est is None:
            frames.append(PitchFrame(cfg.frame_time_ms(k), None, 0.0, rms))
        else:
            f0, conf = est
            frames.append(PitchFrame(cfg.frame_time_ms(k), f0, conf, rms))
    return frames


def smooth_pitch(frames: Iterable[PitchFrame]) -> list[PitchFrame]:
    """5-point median filter in the MIDI domain over voiced runs.

    Unvoiced frames break runs and pass through untouched; near run edges
    the window shrinks symmetrically, so short runs are unchanged only
    where the median of the available points says so.
    """
    from .melody import hz_to_midi, midi_to_hz

    frames = list(frames)
    out: list[PitchFrame] = list(frames)
    run: list[int] = []

    def flush(run: list[int]):
        if not run:
            return
        midis = [hz_to_midi(frames[i].f0_hz) for i in run]
        for j, i in enumerate(run):
            half = min(2, j, len(run) - 1 - j)
            window = sorted(midis[j - half : j + half + 1])
            med = window[len(window) // 2]
            if med != midis[j]:
                out[i] = PitchFrame(frames[i].t_ms, midi_to_hz(med),
                                    frames[i].confidence, frames[i].rms)

    for i, f in enumerate(frames):
        if f.voiced:
            run.append(i)
        else:
            flush(run)
            run = []
    flush(run)
    return out
