"""Synthetic multi-layer corpus with planted, recoverable structure.

Generates a fake model dump: layer 0 is a pure latent frame signal Z, and
each deeper layer l mixes a rotated copy of Z (weight a_l), a rotated
phone-identity component (weight b_l), and fresh noise scaled so latent plus
noise power is the same at every layer.  The a-schedule dips at TROUGH_LAYER,
so a layer-0 similarity curve must bottom out there; the b-schedule peaks at
PEAK_LAYER, so a phone-label probe must peak there.
Utterances are built from a small recurring word vocabulary, giving word
discrimination real same-word pairs.

Everything derives from one integer seed, so two runs write identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tensor_io import FeatureMatrix, FrameSpec, SegmentRecord, write_alignments, write_matrix

__all__ = ["SyntheticSpec", "make_synthetic_corpus", "TROUGH_LAYER", "PEAK_LAYER"]

TROUGH_LAYER = 4
PEAK_LAYER = 5

# mixing weight of the layer-0 latent per layer 1..8: U-shaped, minimum at layer 4
A_SCHEDULE = (1.1, 0.75, 0.45, 0.18, 0.45, 0.7, 0.95, 1.15)
# mixing weight of the phone component per layer 1..8: unimodal, maximum at layer 5
B_SCHEDULE = (0.1, 0.18, 0.28, 0.4, 0.55, 0.4, 0.28, 0.18)
# latent + noise power is held constant across layers so phone separability
# (and hence the label probe) tracks the b-schedule alone
INTERFERENCE_SCALE = 1.25
NOISE_SCHEDULE = tuple(
    float(np.sqrt(INTERFERENCE_SCALE**2 - a**2)) for a in A_SCHEDULE
)

N_PHONES = 39
PHONE_LABELS = tuple(f"P{i:02d}" for i in range(N_PHONES))

STRIDE_MS = 20.0
RECEPTIVE_FIELD_MS = 25.0
OFFSET_MS = 12.5


@dataclass(frozen=True)
class SyntheticSpec:
    """Corpus shape; defaults give 150k frames, scaled to 15k-frame sample sets."""

    n_utts: int = 100
    frames_per_utt: int = 1500
    dim: int = 16
    seed: int = 20240601
    vocab_size: int = 50

    @property
    def n_layers(self) -> int:
        return len(A_SCHEDULE) + 1


def _frame_to_seconds(frame: float) -> float:
    return (OFFSET_MS + frame * STRIDE_MS) / 1000.0


def _build_vocab(spec: SyntheticSpec, rng: np.random.Generator):
    """Fixed vocabulary: each word is a short phone sequence with set durations."""
    vocab = []
    for _ in range(spec.vocab_size):
        n_phones = int(rng.integers(2, 5))
        phones = rng.integers(0, N_PHONES, size=n_phones)
        durations = rng.integers(3, 9, size=n_phones)
        vocab.append((tuple(int(p) for p in phones), tuple(int(d) for d in durations)))
    return vocab


def _utterance_plan(spec: SyntheticSpec, vocab, rng: np.random.Generator):
    """Word sequence filling frames_per_utt; the final phone absorbs the remainder."""
    words = []
    cursor = 0
    while True:
        widx = int(rng.integers(len(vocab)))
        phones, durations = vocab[widx]
        length = sum(durations)
        if cursor + length > spec.frames_per_utt:
            break
        words.append((widx, cursor, list(durations)))
        cursor += length
    if not words:
        raise AssertionError("frames_per_utt too small for a single word")
    leftover = spec.frames_per_utt - cursor
    words[-1][2][-1] += leftover
    return words


def make_synthetic_corpus(root, spec: SyntheticSpec = SyntheticSpec()) -> dict:
    """Write layer files and alignments under root; return a corpus manifest."""
    root = Path(root)
    layers_root = root / "layers"
    layers_root.mkdir(parents=True, exist_ok=True)

    global_rng = np.random.default_rng((spec.seed, 0))
    vocab = _build_vocab(spec, global_rng)
    word_names = [
        "".join(PHONE_LABELS[p] for p in phones).lower() for phones, _ in vocab
    ]
    phone_means = global_rng.standard_normal((N_PHONES, spec.dim)) * 1.6
    rot_z = [
        np.linalg.qr(global_rng.standard_normal((spec.dim, spec.dim)))[0]
        for _ in A_SCHEDULE
    ]
    rot_p = [
        np.linalg.qr(global_rng.standard_normal((spec.dim, spec.dim)))[0]
        for _ in B_SCHEDULE
    ]

    frame_spec = FrameSpec(
        stride_ms=STRIDE_MS, receptive_field_ms=RECEPTIVE_FIELD_MS, offset_ms=OFFSET_MS
    )
    records: list[SegmentRecord] = []
    for u in range(spec.n_utts):
        utt_id = f"synth-{u:04d}"
        rng = np.random.default_rng((spec.seed, 1, u))
        words = _utterance_plan(spec, vocab, rng)

        phone_ids = np.empty(spec.frames_per_utt, dtype=np.int64)
        for widx, start, durations in words:
            phones, _ = vocab[widx]
            cursor = start
            word_start = cursor
            for phone, dur in zip(phones, durations):
                phone_ids[cursor : cursor + dur] = phone
                records.append(
                    SegmentRecord(
                        utt_id,
                        _frame_to_seconds(cursor - 0.5),
                        _frame_to_seconds(cursor + dur - 0.5),
                        PHONE_LABELS[phone],
                        "phone",
                    )
                )
                cursor += dur
            records.append(
                SegmentRecord(
                    utt_id,
                    _frame_to_seconds(word_start - 0.5),
                    _frame_to_seconds(cursor - 0.5),
                    word_names[widx],
                    "word",
                )
            )

        z = rng.standard_normal((spec.frames_per_utt, spec.dim))
        phone_part = phone_means[phone_ids]
        utt_dir = layers_root / utt_id
        utt_dir.mkdir(exist_ok=True)
        write_matrix(
            FeatureMatrix(z, frame_spec=frame_spec, layer_id=0),
            utt_dir / "layer_0.npy",
            dtype="float32",
        )
        for l, (a, b, w) in enumerate(zip(A_SCHEDULE, B_SCHEDULE, NOISE_SCHEDULE), start=1):
            noise = rng.standard_normal((spec.frames_per_utt, spec.dim))
            data = a * (z @ rot_z[l - 1]) + b * (phone_part @ rot_p[l - 1]) + w * noise
            write_matrix(
                FeatureMatrix(data, frame_spec=frame_spec, layer_id=l),
                utt_dir / f"layer_{l}.npy",
                dtype="float32",
            )

    alignments_path = root / "alignments.tsv"
    write_alignments(records, alignments_path)
    manifest = {
        "layers_root": str(layers_root),
        "alignments": str(alignments_path),
        "n_layers": spec.n_layers,
        "n_utts": spec.n_utts,
        "frames_per_utt": spec.frames_per_utt,
        "dim": spec.dim,
        "seed": spec.seed,
        "trough_layer": TROUGH_LAYER,
        "peak_layer": PEAK_LAYER,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
