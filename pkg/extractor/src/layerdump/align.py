"""Forced-alignment conversion: Praat TextGrids to the probe TSV format.

Reads the long-format TextGrids a forced aligner emits (one per utterance,
with interval tiers named like "words" and "phones") and writes one 5-column
TSV: utterance_id, start_s, end_s, label, kind.  Phone labels are collapsed
onto the 39-label inventory by stripping stress digits; any symbol that does
not land in the inventory is an error, never silently dropped.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import PhoneMapError, TextGridError

__all__ = [
    "ARPABET_39",
    "ConversionSummary",
    "convert_alignments",
    "map_phone",
    "parse_textgrid",
]

log = logging.getLogger("layerdump.align")

ARPABET_39 = frozenset(
    "AA AE AH AO AW AY B CH D DH EH ER EY F G HH IH IY JH K L M N NG "
    "OW OY P R S SH T TH UH UW V W Y Z ZH".split()
)

_ITEM_RE = re.compile(r"item\s*\[\d+\]\s*:")
_NAME_RE = re.compile(r'name\s*=\s*"([^"]*)"')
_CLASS_RE = re.compile(r'class\s*=\s*"([^"]*)"')
_INTERVAL_RE = re.compile(
    r"intervals\s*\[\d+\]\s*:\s*"
    r"xmin\s*=\s*([0-9.eE+-]+)\s*"
    r"xmax\s*=\s*([0-9.eE+-]+)\s*"
    r'text\s*=\s*"((?:[^"]|"")*)"'
)


@dataclass(frozen=True)
class Interval:
    xmin: float
    xmax: float
    text: str


def parse_textgrid(path) -> dict[str, list[Interval]]:
    """Parse a long-format TextGrid into {tier name: intervals}.

    Only interval tiers are kept; point tiers do not carry alignments.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    tiers: dict[str, list[Interval]] = {}
    chunks = _ITEM_RE.split(text)[1:]
    for chunk in chunks:
        name_m = _NAME_RE.search(chunk)
        class_m = _CLASS_RE.search(chunk)
        if name_m is None or class_m is None or class_m.group(1) != "IntervalTier":
            continue
        intervals = []
        for m in _INTERVAL_RE.finditer(chunk):
            label = m.group(3).replace('""', '"').strip()
            intervals.append(Interval(float(m.group(1)), float(m.group(2)), label))
        tiers[name_m.group(1)] = intervals
    if not tiers:
        raise TextGridError(f"{path}: no interval tiers found; expected a Praat long-format TextGrid")
    return tiers


def map_phone(symbol: str) -> str | None:
    """Strip stress digits and return the 39-set label, or None if unmappable."""
    stripped = symbol.upper().rstrip("012")
    return stripped if stripped in ARPABET_39 else None


def _pick_tier(tiers: dict[str, list[Interval]], keyword: str) -> list[Interval] | None:
    for name, intervals in tiers.items():
        if keyword in name.lower():
            return intervals
    return None


@dataclass(frozen=True)
class ConversionSummary:
    n_files: int
    n_phones: int
    n_words: int


def convert_alignments(in_dir, out_path) -> ConversionSummary:
    """Convert a directory of aligned TextGrids into one probe TSV.

    Empty-text intervals are the aligner's silence padding and are skipped.
    Every non-empty phone symbol must collapse onto the 39-label set; the
    full list of offenders is raised at once, and nothing is written until
    all files convert cleanly.
    """
    in_dir = Path(in_dir)
    files = sorted(p for p in in_dir.iterdir() if p.suffix.lower() == ".textgrid")
    if not files:
        raise TextGridError(f"{in_dir}: no TextGrid files found")

    rows = []
    unmappable = set()
    n_phones = n_words = 0
    for path in files:
        utt_id = path.stem
        tiers = parse_textgrid(path)
        phones = _pick_tier(tiers, "phone")
        words = _pick_tier(tiers, "word")
        if phones is None and words is None:
            raise TextGridError(f"{path}: no tier named like 'phones' or 'words'")
        if phones is None or words is None:
            log.warning("%s: only a %s tier present", path, "word" if phones is None else "phone")
        for iv in phones or []:
            if not iv.text:
                continue
            if iv.xmax <= iv.xmin or iv.xmin < 0:
                raise TextGridError(f"{path}: bad phone interval [{iv.xmin}, {iv.xmax}] {iv.text!r}")
            label = map_phone(iv.text)
            if label is None:
                unmappable.add(iv.text)
                continue
            rows.append((utt_id, iv.xmin, iv.xmax, label, "phone"))
            n_phones += 1
        for iv in words or []:
            if not iv.text:
                continue
            if iv.xmax <= iv.xmin or iv.xmin < 0:
                raise TextGridError(f"{path}: bad word interval [{iv.xmin}, {iv.xmax}] {iv.text!r}")
            rows.append((utt_id, iv.xmin, iv.xmax, iv.text, "word"))
            n_words += 1
    if unmappable:
        raise PhoneMapError(unmappable)

    out_path = Path(out_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("# utterance_id\tstart_s\tend_s\tlabel\tkind\n")
        for utt, start, end, label, kind in rows:
            fh.write(f"{utt}\t{start:.7g}\t{end:.7g}\t{label}\t{kind}\n")
    return ConversionSummary(n_files=len(files), n_phones=n_phones, n_words=n_words)
