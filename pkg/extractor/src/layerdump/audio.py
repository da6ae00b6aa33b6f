"""Minimal wav reading for model input.

The models consume 16 kHz mono PCM; anything else is rejected up front so a
bad file surfaces as a clear per-utterance error instead of silent garbage.
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .errors import AudioError

__all__ = ["read_wav_16k"]

EXPECTED_RATE_HZ = 16_000


def read_wav_16k(path) -> np.ndarray:
    """Read a 16 kHz mono 16-bit wav into a float32 waveform in [-1, 1)."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as fh:
            rate = fh.getframerate()
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            n = fh.getnframes()
            raw = fh.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise AudioError(f"{path}: not a readable wav file ({exc})") from exc
    if rate != EXPECTED_RATE_HZ:
        raise AudioError(f"{path}: sample rate {rate} Hz, expected {EXPECTED_RATE_HZ} Hz")
    if channels != 1:
        raise AudioError(f"{path}: {channels} channels, expected mono")
    if width != 2:
        raise AudioError(f"{path}: {8 * width}-bit samples, expected 16-bit PCM")
    if n == 0:
        raise AudioError(f"{path}: empty waveform")
    return np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
