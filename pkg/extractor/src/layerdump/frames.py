"""Frame timing derived from a strided conv stack.

Stride, receptive field, and first-frame offset are computed from the
encoder's (kernel, stride) pairs at extraction time rather than hard-coded,
so the sidecars stay correct for any model variant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ManifestError

__all__ = [
    "FrameTiming",
    "conv_stack_timing",
    "n_output_frames",
]


@dataclass(frozen=True)
class FrameTiming:
    """Per-frame timing of a conv encoder's output, in milliseconds."""

    stride_ms: float
    receptive_field_ms: float
    offset_ms: float


def conv_stack_timing(kernels, strides, sample_rate_hz) -> FrameTiming:
    """Walk a conv stack and return the output frame timing.

    Each output frame summarizes a window of ``receptive_field`` input
    samples; consecutive windows advance by the product of the strides.
    The offset is the center of the first window, so frame ``t`` sits at
    ``offset + t * stride`` on the waveform clock.
    """
    kernels = tuple(int(k) for k in kernels)
    strides = tuple(int(s) for s in strides)
    if len(kernels) != len(strides) or not kernels:
        raise ManifestError(f"conv stack needs matching kernel/stride lists, got {len(kernels)} and {len(strides)}")
    if any(k < 1 for k in kernels) or any(s < 1 for s in strides):
        raise ManifestError("conv kernels and strides must be positive")
    field = 1
    jump = 1
    for k, s in zip(kernels, strides):
        field += (k - 1) * jump
        jump *= s
    to_ms = 1000.0 / float(sample_rate_hz)
    return FrameTiming(
        stride_ms=jump * to_ms,
        receptive_field_ms=field * to_ms,
        offset_ms=field / 2.0 * to_ms,
    )


def n_output_frames(n_samples, kernels, strides) -> int:
    """Output length of an unpadded conv stack applied to ``n_samples``."""
    t = int(n_samples)
    for k, s in zip(kernels, strides):
        t = (t - int(k)) // int(s) + 1
        if t < 1:
            return 0
    return t
