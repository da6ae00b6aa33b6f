"""Command line entry points: ``extract`` and ``convert-align``.

Exit codes: 0 success, 1 usage error, 2 data error or partial failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .align import convert_alignments
from .errors import DumpError
from .extract import extract
from .manifest import ExtractionManifest, read_uttlist

__all__ = ["main_extract", "main_convert_align"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on bad usage; raise instead so the exit
    # code mapping stays in one place
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _setup_logging():
    level = os.environ.get("LAYERDUMP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _parse_layers(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise _UsageError(f"--layers must be comma-separated integers, got {text!r}") from exc


def main_extract(argv=None) -> int:
    _setup_logging()
    parser = _Parser(prog="extract", description="Dump per-layer wav2vec 2.0 activations to npy files.")
    parser.add_argument("--model", required=True, help="model tag, hub id, or local checkpoint path")
    parser.add_argument("--uttlist", required=True, help="utterance list: 'utt_id<TAB>wav' or bare wav paths")
    parser.add_argument("--out", required=True, help="output root; one directory per utterance")
    parser.add_argument("--mask", action="store_true", help="apply span masking and record masked frame indices")
    parser.add_argument("--layers", default=None, help="comma-separated layer indices (default: all 0..L)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel utterances")
    try:
        args = parser.parse_args(argv)
        layers = _parse_layers(args.layers) if args.layers is not None else None
        uttlist = Path(args.uttlist)
        if not uttlist.is_file():
            raise _UsageError(f"uttlist not found: {uttlist}")
        manifest = ExtractionManifest(
            model_tag=args.model,
            utterances=read_uttlist(uttlist),
            output_root=Path(args.out),
            layers=layers,
            mask=args.mask,
        )
        summary = extract(manifest, jobs=max(args.jobs, 1))
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (DumpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for failure in summary.failures:
        print(f"FAILED {failure.utt_id}: {failure.error}", file=sys.stderr)
    print(
        f"wrote {len(summary.written)} utterances x {len(summary.layers)} layers under {summary.output_root}"
        f" (stride {summary.timing.stride_ms:g} ms, receptive field {summary.timing.receptive_field_ms:g} ms)"
    )
    if summary.failures:
        print(f"{len(summary.failures)} utterances failed", file=sys.stderr)
        return 2
    return 0


def main_convert_align(argv=None) -> int:
    _setup_logging()
    parser = _Parser(prog="convert-align", description="Convert aligned TextGrids to a 5-column TSV.")
    parser.add_argument("--in", dest="in_dir", required=True, help="directory of TextGrid files")
    parser.add_argument("--out", required=True, help="output TSV path")
    try:
        args = parser.parse_args(argv)
        in_dir = Path(args.in_dir)
        if not in_dir.is_dir():
            raise _UsageError(f"not a directory: {in_dir}")
        summary = convert_alignments(in_dir, args.out)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (DumpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.out}: {summary.n_phones} phone rows, {summary.n_words} word rows from {summary.n_files} files")
    return 0
