"""Audio ingestion: 16-bit PCM WAV (file or stream) to mono floats at 10 kHz."""

from __future__ import annotations

import io
import wave

import numpy as np

ENGINE_RATE_HZ = 10_000


class AudioFormatError(ValueError):
    pass


def ingest_wav(data: bytes) -> np.ndarray:
    """Decode a WAV byte blob into mono samples in [-1, 1] at 10 kHz."""
    try:
        with wave.open(io.BytesIO(data)) as wav:
            sampwidth = wav.getsampwidth()
            if sampwidth != 2:
                raise AudioFormatError(
                    f"only 16-bit PCM supported, got {8 * sampwidth}-bit"
                )
            n_channels = wav.getnchannels()
            rate = wav.getframerate()
            raw = wav.readframes(wav.getnframes())
    except wave.Error as e:
        raise AudioFormatError(f"unreadable WAV: {e}") from e

    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    return resample_linear(samples, rate, ENGINE_RATE_HZ)


def ingest_pcm(data: bytes, rate: int = ENGINE_RATE_HZ, n_channels: int = 1) -> np.ndarray:
    """Raw 16-bit little-endian PCM stream to engine-rate mono samples."""
    samples = np.frombuffer(data[: len(data) - len(data) % (2 * n_channels)],
                            dtype="<i2").astype(np.float64) / 32768.0
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    return resample_linear(samples, rate, ENGINE_RATE_HZ)


def resample_linear(samples: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    if rate_in == rate_out or samples.size == 0:
        return np.asarray(samples, dtype=np.float64)
    duration = samples.size / rate_in
    n_out = int(round(duration * rate_out))
    t_out = np.arange(n_out) / rate_out
    t_in = np.arange(samples.size) / rate_in
    return np.interp(t_out, t_in, samples)


def write_wav(path, samples: np.ndarray, rate: int = ENGINE_RATE_HZ) -> None:
    """Test/fixture helper: floats in [-1, 1] to a 16-bit mono WAV."""
    pcm = np.clip(np.asarray(samples) * 32767.0, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(pcm.tobytes())
