"""Extraction manifests: which model, which utterances, which layers.

Layer index 0 is the conv encoder output ("local features"); indices 1..L
are the transformer layer outputs.  ``layers=None`` means all of 0..L, which
is resolved once the model depth is known.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

__all__ = [
    "ExtractionManifest",
    "read_uttlist",
]


@dataclass(frozen=True)
class ExtractionManifest:
    """One extraction job.

    ``utterances`` pairs each utterance id with its audio path.  Ids become
    directory names under ``output_root``, so they must be non-empty and
    unique.
    """

    model_tag: str
    utterances: tuple[tuple[str, Path], ...]
    output_root: Path
    layers: tuple[int, ...] | None = None
    mask: bool = False

    def __post_init__(self):
        if not self.model_tag:
            raise ManifestError("model_tag must be non-empty")
        if not self.utterances:
            raise ManifestError("manifest lists no utterances")
        seen = set()
        for utt_id, _ in self.utterances:
            if not utt_id or "/" in utt_id:
                raise ManifestError(f"bad utterance id {utt_id!r}")
            if utt_id in seen:
                raise ManifestError(f"duplicate utterance id {utt_id!r}")
            seen.add(utt_id)
        if self.layers is not None:
            if not self.layers:
                raise ManifestError("layers must be None or a non-empty index list")
            if any(i < 0 for i in self.layers) or len(set(self.layers)) != len(self.layers):
                raise ManifestError(f"layers must be distinct non-negative indices, got {self.layers}")

    def resolved_layers(self, n_transformer_layers: int) -> tuple[int, ...]:
        """Concrete layer indices for a model of depth L, validated against it."""
        if self.layers is None:
            return tuple(range(n_transformer_layers + 1))
        bad = [i for i in self.layers if i > n_transformer_layers]
        if bad:
            raise ManifestError(f"layer indices {bad} exceed model depth L={n_transformer_layers}")
        return tuple(sorted(self.layers))


def read_uttlist(path) -> tuple[tuple[str, Path], ...]:
    """Parse an utterance list file into (utt_id, audio_path) pairs.

    Each line is either ``utt_id<TAB>path`` or a bare path, in which case the
    file stem is the id.  Relative paths resolve against the list's directory.
    Blank lines and ``#`` comments are skipped.
    """
    path = Path(path)
    base = path.parent
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                audio = Path(parts[0])
                utt_id = audio.stem
            elif len(parts) == 2:
                utt_id, audio = parts[0].strip(), Path(parts[1])
            else:
                raise ManifestError(f"{path}:{lineno}: expected 'utt_id<TAB>path' or a bare path")
            if not utt_id:
                raise ManifestError(f"{path}:{lineno}: empty utterance id")
            if not audio.is_absolute():
                audio = (base / audio).resolve()
            pairs.append((utt_id, audio))
    if not pairs:
        raise ManifestError(f"{path}: no utterances listed")
    return tuple(pairs)
