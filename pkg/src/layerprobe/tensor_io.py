"""Readers and writers for all on-disk data.

Feature matrices travel as npy v1.0 files with an optional ``<stem>.meta.json``
sidecar carrying frame timing and the layer index.  Alignments are a neutral
5-column TSV, embeddings use the plain-text ``word v1 .. vd`` convention, and
word-similarity benchmarks are ``word1,word2,score`` CSV files.

All readers are pure and return immutable-by-convention values, so they are
safe to call concurrently on distinct files.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, ShapeError

__all__ = [
    "FrameSpec",
    "FeatureMatrix",
    "SegmentRecord",
    "WordSimBenchmark",
    "read_matrix",
    "write_matrix",
    "matrix_shape",
    "read_alignments",
    "write_alignments",
    "read_embedding_table",
    "read_wordsim_benchmark",
]

SEGMENT_KINDS = ("phone", "word")


@dataclass(frozen=True)
class FrameSpec:
    """Timing of a frame stream: hop, window extent and center of frame 0, in ms."""

    stride_ms: float
    receptive_field_ms: float
    offset_ms: float

    def frame_center_s(self, i: int) -> float:
        return (self.offset_ms + i * self.stride_ms) / 1000.0


@dataclass
class FeatureMatrix:
    """An n x d matrix of frame- or segment-level vectors.

    ``frame_spec`` is present iff the rows are time-indexed frames.  Data is
    float64 in memory regardless of the on-disk dtype.
    """

    data: np.ndarray
    frame_spec: FrameSpec | None = None
    layer_id: int | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ShapeError(f"feature matrix must be 2-D, got rank {self.data.ndim}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ShapeError(f"feature matrix must be at least 1x1, got {self.data.shape}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SegmentRecord:
    """One aligned unit: an utterance span with a phone or word label."""

    utterance_id: str
    start_s: float
    end_s: float
    label: str
    kind: str

    def __post_init__(self):
        if not (0.0 <= self.start_s < self.end_s):
            raise DataError(
                f"segment must satisfy 0 <= start < end, got [{self.start_s}, {self.end_s})"
            )
        if not self.label:
            raise DataError("segment label must be non-empty")
        if self.kind not in SEGMENT_KINDS:
            raise FormatError(f"unknown segment kind {self.kind!r}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass
class WordSimBenchmark:
    """A named list of (word_a, word_b, human_score) judgements."""

    name: str
    pairs: list[tuple[str, str, float]] = field(default_factory=list)


def _meta_path(path: Path) -> Path:
    return path.with_suffix(".meta.json")


def read_matrix(path) -> FeatureMatrix:
    """Load an npy matrix, promoting to float64 and validating finiteness.

    A ``<stem>.meta.json`` sidecar, when present, supplies the frame spec and
    layer id.
    """
    path = Path(path)
    try:
        arr = np.load(path, allow_pickle=False)
    except FileNotFoundError:
        raise
    except (ValueError, OSError) as exc:
        raise FormatError(f"{path}: not a readable npy file ({exc})") from exc
    if arr.ndim != 2:
        raise ShapeError(f"{path}: expected a 2-D matrix, got rank {arr.ndim}")
    if arr.dtype not in (np.float32, np.float64):
        raise FormatError(f"{path}: expected float32/float64 data, got {arr.dtype}")
    data = np.ascontiguousarray(arr, dtype=np.float64)
    bad = ~np.isfinite(data)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise DataError(f"{path}: non-finite entry at row {r}, col {c}")

    frame_spec = None
    layer_id = None
    meta_path = _meta_path(path)
    if meta_path.exists():
        try:
            meta = json.loads(meta_path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{meta_path}: invalid JSON sidecar ({exc})") from exc
        if "stride_ms" in meta:
            frame_spec = FrameSpec(
                stride_ms=float(meta["stride_ms"]),
                receptive_field_ms=float(meta["receptive_field_ms"]),
                offset_ms=float(meta["offset_ms"]),
            )
        if meta.get("layer_id") is not None:
            layer_id = int(meta["layer_id"])
    return FeatureMatrix(data=data, frame_spec=frame_spec, layer_id=layer_id)


def write_matrix(m: FeatureMatrix, path, dtype="float64") -> None:
    """Write a matrix as npy v1.0 plus a metadata sidecar when needed.

    With ``dtype='float64'`` a write/read round trip is bitwise exact.
    """
    path = Path(path)
    if dtype not in ("float32", "float64"):
        raise FormatError(f"on-disk dtype must be float32 or float64, got {dtype}")
    np.save(path, np.ascontiguousarray(m.data, dtype=dtype))
    if m.frame_spec is not None or m.layer_id is not None:
        meta = {}
        if m.frame_spec is not None:
            meta.update(
                stride_ms=m.frame_spec.stride_ms,
                receptive_field_ms=m.frame_spec.receptive_field_ms,
                offset_ms=m.frame_spec.offset_ms,
            )
        if m.layer_id is not None:
            meta["layer_id"] = m.layer_id
        _meta_path(path).write_text(json.dumps(meta, sort_keys=True) + "\n")


def matrix_shape(path) -> tuple[int, int]:
    """Read only the npy header and return the stored (rows, cols)."""
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            version = np.lib.format.read_magic(fh)
            shape, _, _ = np.lib.format._read_array_header(fh, version)
        except ValueError as exc:
            raise FormatError(f"{path}: malformed npy header ({exc})") from exc
    if len(shape) != 2:
        raise ShapeError(f"{path}: expected a 2-D matrix, got shape {shape}")
    return shape


def read_alignments(path) -> list[SegmentRecord]:
    """Parse a 5-column alignment TSV into segment records, keeping file order.

    Columns are utterance_id, start_s, end_s, label, kind.  Lines starting
    with ``#`` and blank lines are skipped.
    """
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise FormatError(f"{path}:{lineno}: expected 5 tab-separated columns, got {len(parts)}")
            utt, start_str, end_str, label, kind = parts
            try:
                start_s, end_s = float(start_str), float(end_str)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric time ({exc})") from exc
            if kind not in SEGMENT_KINDS:
                raise FormatError(f"{path}:{lineno}: unknown kind {kind!r}")
            if not (0.0 <= start_s < end_s):
                raise DataError(f"{path}:{lineno}: start must be >= 0 and < end, got [{start_s}, {end_s})")
            if not label:
                raise DataError(f"{path}:{lineno}: empty label")
            records.append(SegmentRecord(utt, start_s, end_s, label, kind))
    return records


def write_alignments(records, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# utterance_id\tstart_s\tend_s\tlabel\tkind\n")
        for r in records:
            fh.write(f"{r.utterance_id}\t{r.start_s:.7g}\t{r.end_s:.7g}\t{r.label}\t{r.kind}\n")


def read_embedding_table(path) -> dict[str, np.ndarray]:
    """Read a GloVe-style text embedding table.

    One ``word v1 ... vd`` line per entry; every line must carry the same
    dimension.  Duplicate words keep the last occurrence and emit a warning.
    """
    path = Path(path)
    table: dict[str, np.ndarray] = {}
    dim = None
    duplicates = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise FormatError(f"{path}:{lineno}: no vector components")
            elif len(values) != dim:
                raise FormatError(
                    f"{path}:{lineno}: dimension {len(values)} differs from first line's {dim}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric component ({exc})") from exc
            if word in table:
                duplicates.append(word)
            table[word] = vec
    if duplicates:
        warnings.warn(
            f"{path}: {len(duplicates)} duplicate word(s), last occurrence kept "
            f"(e.g. {duplicates[0]!r})",
            stacklevel=2,
        )
    return table


def read_wordsim_benchmark(path) -> WordSimBenchmark:
    """Read a ``word1,word2,score`` CSV benchmark, named after the file stem."""
    path = Path(path)
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if [h.strip().lower() for h in header[:3]] != ["word1", "word2", "score"]:
            raise FormatError(f"{path}:1: expected header word1,word2,score, got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise FormatError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            a, b, score_str = row[0].strip(), row[1].strip(), row[2].strip()
            try:
                score = float(score_str)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric score {score_str!r}") from None
            if not np.isfinite(score):
                raise DataError(f"{path}:{lineno}: non-finite score")
            pairs.append((a, b, score))
    if len(pairs) < 2:
        raise DataError(f"{path}: benchmark needs at least 2 pairs, got {len(pairs)}")
    return WordSimBenchmark(name=path.stem, pairs=pairs)
