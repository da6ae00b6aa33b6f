"""Log-mel filter bank features and frame-stream alignment.

The fbank recipe is deliberately minimal: Hann window, magnitude-squared FFT,
HTK-scale triangular filters with unit peaks, floor then natural log.  No
pre-emphasis, no dithering, no padding; every knob lives on FbankConfig.
"""

from __future__ import annotations

import logging
import wave
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, InputError, ShapeError, UnsupportedError
from .tensor_io import FeatureMatrix, FrameSpec

__all__ = [
    "FbankConfig",
    "read_wav",
    "log_mel_spectrogram",
    "align_streams",
    "mel_filterbank",
    "hz_to_mel",
    "mel_to_hz",
]

log = logging.getLogger("layerprobe.dsp")


@dataclass(frozen=True)
class FbankConfig:
    """Filter bank analysis parameters; defaults give the standard 80-dim 25/10 recipe."""

    sample_rate_hz: int
    n_mels: int = 80
    win_ms: float = 25.0
    hop_ms: float = 10.0
    fmin_hz: float = 0.0
    fmax_hz: float | None = None
    floor: float = 1e-10

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise InputError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if not (0.0 < self.hop_ms <= self.win_ms):
            raise InputError(f"need 0 < hop_ms <= win_ms, got hop={self.hop_ms}, win={self.win_ms}")
        if self.n_mels < 1:
            raise InputError(f"n_mels must be >= 1, got {self.n_mels}")
        if self.fmax_hz is None:
            object.__setattr__(self, "fmax_hz", self.sample_rate_hz / 2.0)
        nyquist = self.sample_rate_hz / 2.0
        if not (0.0 <= self.fmin_hz < self.fmax_hz <= nyquist):
            raise InputError(
                f"need 0 <= fmin < fmax <= Nyquist, got fmin={self.fmin_hz}, "
                f"fmax={self.fmax_hz}, Nyquist={nyquist}"
            )
        if self.floor <= 0.0:
            raise InputError(f"floor must be positive, got {self.floor}")

    @property
    def win_samples(self) -> int:
        return int(round(self.win_ms * self.sample_rate_hz / 1000.0))

    @property
    def hop_samples(self) -> int:
        return int(round(self.hop_ms * self.sample_rate_hz / 1000.0))


def hz_to_mel(f):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: FbankConfig, n_fft: int) -> np.ndarray:
    """Unit-peak triangular filters on the HTK mel scale, shape (n_mels, n_fft//2 + 1)."""
    edges_mel = np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.fmax_hz), cfg.n_mels + 2)
    edges_hz = mel_to_hz(edges_mel)
    bin_hz = np.arange(n_fft // 2 + 1) * (cfg.sample_rate_hz / n_fft)
    lower, center, upper = edges_hz[:-2, None], edges_hz[1:-1, None], edges_hz[2:, None]
    up = (bin_hz - lower) / (center - lower)
    down = (upper - bin_hz) / (upper - center)
    return np.maximum(0.0, np.minimum(up, down))


def filterbank_center_frequencies(cfg: FbankConfig) -> np.ndarray:
    """Center frequency in Hz of each of the n_mels triangles."""
    edges_mel = np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.fmax_hz), cfg.n_mels + 2)
    return mel_to_hz(edges_mel[1:-1])


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a mono 16-bit PCM WAV file as a float64 waveform in [-1, 1)."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getnchannels() != 1:
                raise FormatError(f"{path}: expected mono audio, got {wf.getnchannels()} channels")
            if wf.getsampwidth() != 2:
                raise FormatError(f"{path}: expected 16-bit PCM, got {8 * wf.getsampwidth()}-bit")
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise FormatError(f"{path}: not a readable WAV file ({exc})") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return samples, rate


def log_mel_spectrogram(waveform, cfg: FbankConfig) -> FeatureMatrix:
    """Compute T x n_mels natural-log mel energies with no padding.

    T = floor((N - win) / hop) + 1; trailing samples that do not fill a full
    window are dropped.  Frame 0 is centered at win/2, so the frame spec is
    (hop_ms, win_ms, win_ms / 2).
    """
    waveform = np.asarray(waveform, dtype=np.float64)
    if waveform.ndim != 1:
        raise ShapeError(f"waveform must be 1-D, got rank {waveform.ndim}")
    if not np.isfinite(waveform).all():
        raise DataError("waveform contains non-finite samples")
    win, hop = cfg.win_samples, cfg.hop_samples
    if waveform.size < win:
        raise InputError(f"waveform has {waveform.size} samples, shorter than one {win}-sample window")

    frames = np.lib.stride_tricks.sliding_window_view(waveform, win)[::hop]
    window = np.hanning(win)
    spectrum = np.abs(np.fft.rfft(frames * window, n=win, axis=1)) ** 2
    energies = spectrum @ mel_filterbank(cfg, n_fft=win).T
    data = np.log(np.maximum(energies, cfg.floor))
    spec = FrameSpec(stride_ms=cfg.hop_ms, receptive_field_ms=cfg.win_ms, offset_ms=cfg.win_ms / 2.0)
    return FeatureMatrix(data=data, frame_spec=spec)


def _stride_ratio(coarse_ms: float, fine_ms: float) -> int:
    frac = Fraction(coarse_ms / fine_ms).limit_denominator(4)
    if abs(float(frac) - coarse_ms / fine_ms) > 1e-6:
        raise UnsupportedError(
            f"stride ratio {coarse_ms}/{fine_ms} is not rational with denominator <= 4"
        )
    if frac.denominator != 1:
        raise UnsupportedError(
            f"stride ratio {coarse_ms}:{fine_ms} reduces to {frac}, not an integer"
        )
    return frac.numerator


def align_streams(a: FeatureMatrix, b: FeatureMatrix) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Bring two frame streams onto a common stride and length.

    The finer-stride stream is reduced by averaging consecutive groups of
    r = coarse_stride / fine_stride frames, then both streams are truncated
    to the shorter length.  Outputs share the coarser stream's frame spec.
    Receptive-field mismatch is logged, not corrected.
    """
    if a.frame_spec is None or b.frame_spec is None:
        raise InputError("align_streams requires frame_spec on both streams")

    fine, coarse, swapped = a, b, False
    if a.frame_spec.stride_ms > b.frame_spec.stride_ms:
        fine, coarse, swapped = b, a, True
    r = _stride_ratio(coarse.frame_spec.stride_ms, fine.frame_spec.stride_ms)

    if r == 1:
        reduced = fine.data
        spec = coarse.frame_spec
    else:
        t = (fine.n // r) * r
        reduced = fine.data[:t].reshape(-1, r, fine.d).mean(axis=1)
        spec = coarse.frame_spec

    t_out = min(reduced.shape[0], coarse.n)
    out_fine = FeatureMatrix(reduced[:t_out], frame_spec=spec, layer_id=fine.layer_id)
    out_coarse = FeatureMatrix(coarse.data[:t_out], frame_spec=spec, layer_id=coarse.layer_id)

    rf_fine, rf_coarse = fine.frame_spec.receptive_field_ms, coarse.frame_spec.receptive_field_ms
    if rf_fine != rf_coarse:
        log.info(
            "receptive fields differ after stride matching (%.3g ms vs %.3g ms); tolerated",
            rf_fine,
            rf_coarse,
        )
    return (out_coarse, out_fine) if swapped else (out_fine, out_coarse)
