"""Segment pooling and balanced sampling.

Turns frame-level matrices plus alignment records into pooled phone/word
vectors, builds per-word-type embeddings, and draws seeded sample subsets.
Frame membership is decided by frame-center containment, so every segment
pools at least one frame via the nearest-center fallback.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, InputError, MissingUtteranceError, RangeError
from .tensor_io import FeatureMatrix, FrameSpec, SegmentRecord

__all__ = [
    "PooledSet",
    "SamplePlan",
    "frames_for_interval",
    "pool_segment",
    "build_pooled_set",
    "type_embeddings",
    "draw_sample_sets",
    "filter_word_records",
    "write_pooled_set",
    "read_pooled_set",
]

POOL_STRATEGIES = ("mean", "central_third_mean")


@dataclass
class PooledSet:
    """Pooled segment vectors with their labels and provenance, one row each."""

    vectors: np.ndarray
    labels: list[str]
    kind: str
    source: list[tuple[str, float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise InputError(f"pooled vectors must be 2-D, got rank {self.vectors.ndim}")
        m = self.vectors.shape[0]
        if not self.source:
            self.source = [("", 0.0, 0.0)] * m
        if not (m == len(self.labels) == len(self.source)):
            raise InputError(
                f"row/label/source count mismatch: {m} vs {len(self.labels)} vs {len(self.source)}"
            )
        if not np.isfinite(self.vectors).all():
            raise DataError("pooled vectors contain non-finite entries")

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class SamplePlan:
    """How to draw repeated sample sets: one target size, n_sets independent seeds."""

    seed: int
    target: int
    n_sets: int = 4
    balancing: str = "uniform"

    def __post_init__(self):
        if self.n_sets < 1:
            raise InputError(f"n_sets must be >= 1, got {self.n_sets}")
        if self.target < 1:
            raise InputError(f"target must be >= 1, got {self.target}")
        if self.balancing not in ("uniform", "per_label_equal"):
            raise InputError(f"unknown balancing {self.balancing!r}")


def frames_for_interval(
    frame_spec: FrameSpec, start_s: float, end_s: float, n_frames: int
) -> tuple[int, int]:
    """Half-open frame range whose centers fall inside [start_s, end_s).

    An interval too narrow to contain a center maps to the single frame whose
    center is nearest the interval midpoint.  Intervals that miss the stream's
    time span entirely are a range error.
    """
    if end_s <= start_s:
        raise InputError(f"need start < end, got [{start_s}, {end_s})")
    if n_frames < 1:
        raise InputError(f"need at least one frame, got {n_frames}")
    stride, offset = frame_spec.stride_ms, frame_spec.offset_ms
    start_ms, end_ms = start_s * 1000.0, end_s * 1000.0

    span_lo = offset - stride / 2.0
    span_hi = offset + (n_frames - 1) * stride + stride / 2.0
    if end_ms <= span_lo or start_ms >= span_hi:
        raise RangeError(
            f"interval [{start_s}, {end_s}) s lies outside the stream span "
            f"[{span_lo / 1000.0:.4f}, {span_hi / 1000.0:.4f}) s"
        )

    i0 = max(0, math.ceil((start_ms - offset) / stride))
    i1 = min(n_frames, math.ceil((end_ms - offset) / stride))
    if i0 >= i1:
        mid = (start_ms + end_ms) / 2.0
        i = int(round((mid - offset) / stride))
        i = min(max(i, 0), n_frames - 1)
        return i, i + 1
    return i0, i1


def pool_segment(m: FeatureMatrix, rng: tuple[int, int], strategy: str) -> np.ndarray:
    """Collapse rows i0..i1 into one vector by mean or central-third mean."""
    i0, i1 = rng
    if not (0 <= i0 < i1 <= m.n):
        raise InputError(f"frame range [{i0}, {i1}) invalid for a {m.n}-row matrix")
    if strategy not in POOL_STRATEGIES:
        raise InputError(f"unknown pooling strategy {strategy!r}")
    if strategy == "mean":
        return m.data[i0:i1].mean(axis=0)
    n = i1 - i0
    lo = i0 + n // 3
    hi = i0 + (2 * n + 2) // 3
    if lo >= hi:
        lo = i0 + n // 2
        hi = lo + 1
    return m.data[lo:hi].mean(axis=0)


def build_pooled_set(
    matrices: dict[str, FeatureMatrix],
    records: list[SegmentRecord],
    kind: str,
    strategy: str | None = None,
) -> PooledSet:
    """Pool one vector per alignment record, in record order.

    Defaults to central-third mean for phones and plain mean for words.
    """
    if strategy is None:
        strategy = "central_third_mean" if kind == "phone" else "mean"
    wrong = [r for r in records if r.kind != kind]
    if wrong:
        raise InputError(f"{len(wrong)} record(s) have kind != {kind!r} (e.g. {wrong[0].label!r})")
    missing = {r.utterance_id for r in records} - set(matrices)
    if missing:
        raise MissingUtteranceError(missing)
    if not records:
        raise InputError("no records to pool")

    rows, labels, source = [], [], []
    for r in records:
        m = matrices[r.utterance_id]
        if m.frame_spec is None:
            raise InputError(f"matrix for {r.utterance_id!r} lacks frame timing metadata")
        frame_range = frames_for_interval(m.frame_spec, r.start_s, r.end_s, m.n)
        rows.append(pool_segment(m, frame_range, strategy))
        labels.append(r.label)
        source.append((r.utterance_id, r.start_s, r.end_s))
    return PooledSet(np.vstack(rows), labels, kind, source)


def type_embeddings(p: PooledSet) -> dict[str, np.ndarray]:
    """Average the rows of each distinct word into one embedding per word type."""
    if p.kind != "word":
        raise InputError(f"type embeddings need word-kind input, got {p.kind!r}")
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for row, label in zip(p.vectors, p.labels):
        if label in sums:
            sums[label] = sums[label] + row
            counts[label] += 1
        else:
            sums[label] = row.copy()
            counts[label] = 1
    return {label: sums[label] / counts[label] for label in sums}


def draw_sample_sets(
    records: list[SegmentRecord], plan: SamplePlan
) -> list[list[SegmentRecord]]:
    """Draw n_sets pseudo-random subsets of about plan.target records each.

    Each set uses its own seed stream (plan.seed, set index), sampling without
    replacement and preserving original record order within a set.  With
    per_label_equal balancing, each label is capped at ceil(target / #labels).
    """
    if not records:
        raise InputError("cannot sample from zero records")
    sets = []
    for s in range(plan.n_sets):
        rng = np.random.default_rng((plan.seed, s))
        if plan.balancing == "uniform":
            if len(records) <= plan.target:
                if len(records) < plan.target:
                    warnings.warn(
                        f"only {len(records)} records available for target {plan.target}; "
                        "taking all",
                        stacklevel=2,
                    )
                chosen = np.arange(len(records))
            else:
                chosen = rng.choice(len(records), size=plan.target, replace=False)
        else:
            by_label: dict[str, list[int]] = {}
            for i, r in enumerate(records):
                by_label.setdefault(r.label, []).append(i)
            cap = math.ceil(plan.target / len(by_label))
            picked = []
            for label in sorted(by_label):
                idx = np.asarray(by_label[label])
                if len(idx) > cap:
                    idx = rng.choice(idx, size=cap, replace=False)
                picked.append(idx)
            chosen = np.concatenate(picked)
            if len(chosen) < plan.target:
                warnings.warn(
                    f"balanced draw yielded {len(chosen)} records for target {plan.target}",
                    stacklevel=2,
                )
        sets.append([records[i] for i in np.sort(chosen)])
    return sets


def filter_word_records(
    records: list[SegmentRecord], min_chars: int = 5, min_dur_s: float = 0.5
) -> list[SegmentRecord]:
    """Keep word records whose label and duration meet the length floors."""
    wrong = [r for r in records if r.kind != "word"]
    if wrong:
        raise InputError(f"{len(wrong)} record(s) are not word-kind")
    return [r for r in records if len(r.label) >= min_chars and r.duration_s >= min_dur_s]


def write_pooled_set(p: PooledSet, prefix) -> None:
    """Write vectors as <prefix>.npy and labels/provenance as <prefix>.labels.tsv."""
    prefix = Path(prefix)
    np.save(prefix.with_suffix(".npy"), p.vectors)
    with open(prefix.with_suffix(".labels.tsv"), "w", encoding="utf-8") as fh:
        fh.write(f"# kind={p.kind}\n")
        for label, (utt, start, end) in zip(p.labels, p.source):
            fh.write(f"{label}\t{utt}\t{start:.7g}\t{end:.7g}\n")


def read_pooled_set(prefix) -> PooledSet:
    prefix = Path(prefix)
    vectors = np.load(prefix.with_suffix(".npy"))
    labels, source = [], []
    kind = None
    path = prefix.with_suffix(".labels.tsv")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("# kind="):
                kind = line.split("=", 1)[1]
                continue
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 columns, got {len(parts)}")
            labels.append(parts[0])
            source.append((parts[1], float(parts[2]), float(parts[3])))
    if kind is None:
        raise FormatError(f"{path}: missing '# kind=' header")
    return PooledSet(vectors, labels, kind, source)
