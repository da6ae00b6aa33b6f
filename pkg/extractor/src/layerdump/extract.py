"""Per-layer activation dumping for wav2vec 2.0 models.

Layer 0 is the conv encoder output (the model's local features); layers
1..L are the transformer layer outputs.  Every dumped matrix is T x d
float32 with a JSON sidecar carrying the frame timing, which is derived
from the model's own conv stack rather than assumed.

Utterances are independent: one bad file is recorded in the summary and
extraction moves on.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .audio import read_wav_16k
from .errors import AudioError, DumpError, ManifestError
from .frames import FrameTiming, conv_stack_timing, n_output_frames
from .manifest import ExtractionManifest

__all__ = [
    "MODEL_TAGS",
    "ExtractionSummary",
    "UtteranceFailure",
    "extract",
    "load_model",
    "resolve_model_id",
]

log = logging.getLogger("layerdump.extract")

# Friendly tags for the published checkpoints; anything else is passed
# through as a model id or local path.
MODEL_TAGS = {
    "base": "facebook/wav2vec2-base",
    "base-ft-960": "facebook/wav2vec2-base-960h",
    "large": "facebook/wav2vec2-large",
    "large-60k": "facebook/wav2vec2-large-lv60",
}

MASK_FILE = "masked_frames.npy"


def resolve_model_id(tag: str) -> str:
    return MODEL_TAGS.get(tag, tag)


def load_model(tag: str):
    """Load a wav2vec 2.0 encoder in eval mode (no dropout, no mask sampling)."""
    from transformers import Wav2Vec2Model

    model = Wav2Vec2Model.from_pretrained(resolve_model_id(tag))
    model.eval()
    return model


@dataclass(frozen=True)
class UtteranceFailure:
    utt_id: str
    error: str


@dataclass(frozen=True)
class ExtractionSummary:
    """What an extraction run produced: per-utterance outcomes plus the shared geometry."""

    output_root: Path
    layers: tuple[int, ...]
    timing: FrameTiming
    written: tuple[str, ...]
    failures: tuple[UtteranceFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def _utt_seed(utt_id: str) -> int:
    # stable across processes, unlike hash()
    return int.from_bytes(hashlib.blake2s(utt_id.encode(), digest_size=8).digest(), "big")


def _sample_mask(n_frames: int, prob: float, length: int, min_spans: int, rng) -> np.ndarray:
    """Span masking in the style the models train with: fixed-length spans
    at uniformly drawn starts, covering about ``prob`` of the frames."""
    mask = np.zeros(n_frames, dtype=bool)
    if n_frames < length or length < 1:
        return mask
    n_spans = max(int(prob * n_frames / length + rng.random()), min_spans)
    n_spans = min(n_spans, n_frames - length + 1)
    if n_spans < 1:
        return mask
    starts = rng.choice(n_frames - length + 1, size=n_spans, replace=False)
    for s in starts:
        mask[s : s + length] = True
    return mask


def _write_sidecar(path: Path, timing: FrameTiming, layer_id: int) -> None:
    meta = {
        "stride_ms": timing.stride_ms,
        "receptive_field_ms": timing.receptive_field_ms,
        "offset_ms": timing.offset_ms,
        "layer_id": layer_id,
    }
    path.write_text(json.dumps(meta, sort_keys=True) + "\n")


def _dump_utterance(model, timing, layers, utt_id, audio_path, out_root, mask) -> None:
    waveform = read_wav_16k(audio_path)
    kernels, strides = model.config.conv_kernel, model.config.conv_stride
    frames = n_output_frames(waveform.shape[0], kernels, strides)
    if frames < 1:
        raise AudioError(f"{audio_path}: waveform shorter than the conv receptive field")

    batch = torch.from_numpy(waveform)[None, :]
    mask_indices = None
    if mask:
        rng = np.random.default_rng(_utt_seed(utt_id))
        mask_row = _sample_mask(
            frames,
            model.config.mask_time_prob,
            model.config.mask_time_length,
            getattr(model.config, "mask_time_min_masks", 0),
            rng,
        )
        mask_indices = torch.from_numpy(mask_row)[None, :]
    with torch.no_grad():
        out = model(batch, mask_time_indices=mask_indices, output_hidden_states=True)

    # index 0 -> conv output; index i>=1 -> transformer layer i
    per_layer = {0: out.extract_features}
    for i, h in enumerate(out.hidden_states[1:], start=1):
        per_layer[i] = h

    utt_dir = out_root / utt_id
    utt_dir.mkdir(parents=True, exist_ok=True)
    for layer in layers:
        data = np.ascontiguousarray(per_layer[layer][0].numpy(), dtype=np.float32)
        np.save(utt_dir / f"layer_{layer}.npy", data)
        _write_sidecar(utt_dir / f"layer_{layer}.meta.json", timing, layer)
    if mask:
        masked = np.flatnonzero(mask_indices[0].numpy()).astype(np.int64)
        np.save(utt_dir / MASK_FILE, masked)


def extract(manifest: ExtractionManifest, model=None, jobs: int = 1) -> ExtractionSummary:
    """Dump the manifest's layers for every listed utterance.

    Utterance failures (unreadable audio, wrong format, too-short input) are
    collected rather than raised; the summary lists them so a batch run can
    report partial success.  With ``mask=False`` the run is deterministic.
    """
    if model is None:
        model = load_model(manifest.model_tag)
    model.eval()
    if manifest.mask and not getattr(model.config, "apply_spec_augment", True):
        raise ManifestError("model config has apply_spec_augment=False; it would silently ignore the mask")

    layers = manifest.resolved_layers(model.config.num_hidden_layers)
    timing = conv_stack_timing(model.config.conv_kernel, model.config.conv_stride, 16_000)
    out_root = Path(manifest.output_root)
    out_root.mkdir(parents=True, exist_ok=True)

    def run_one(item):
        utt_id, audio_path = item
        try:
            _dump_utterance(model, timing, layers, utt_id, audio_path, out_root, manifest.mask)
        except Exception as exc:
            log.warning("utterance %s failed: %s", utt_id, exc)
            return UtteranceFailure(utt_id, str(exc))
        return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, manifest.utterances))
    else:
        outcomes = [run_one(item) for item in manifest.utterances]

    failures = tuple(o for o in outcomes if o is not None)
    failed_ids = {f.utt_id for f in failures}
    written = tuple(u for u, _ in manifest.utterances if u not in failed_ids)
    return ExtractionSummary(
        output_root=out_root,
        layers=layers,
        timing=timing,
        written=written,
        failures=failures,
    )
