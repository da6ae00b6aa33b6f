"""Command line front end: fbank, pool, run, report, and selftest subcommands.

Exit codes: 0 success, 1 usage error, 2 data error.  LAYERPROBE_LOG sets the
logging level (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import tempfile
from pathlib import Path

from .dsp import FbankConfig, log_mel_spectrogram, read_wav
from .errors import ProbeError
from .pipeline import (
    discover_layers,
    emit_report,
    load_config,
    load_report,
    run_experiment,
    selftest,
)
from .segments import build_pooled_set, write_pooled_set
from .tensor_io import read_alignments, read_matrix, write_matrix


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; 2 is reserved for data errors here
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="layerprobe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fbank", help="compute log-mel features for one WAV file")
    p.add_argument("--in", dest="wav", required=True, help="mono 16-bit PCM WAV")
    p.add_argument("--out", required=True, help="output .npy path")
    p.add_argument("--n-mels", type=int, default=80)
    p.add_argument("--win-ms", type=float, default=25.0)
    p.add_argument("--hop-ms", type=float, default=10.0)
    p.set_defaults(fn=_cmd_fbank)

    p = sub.add_parser("pool", help="pool one layer into per-segment vectors")
    p.add_argument("--layers-root", required=True)
    p.add_argument("--alignments", required=True)
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--kind", choices=["phone", "word"], required=True)
    p.add_argument("--out", required=True, help="output prefix (.npy + .labels.tsv)")
    p.add_argument("--strategy", choices=["mean", "central_third_mean"], default=None)
    p.set_defaults(fn=_cmd_pool)

    p = sub.add_parser("run", help="run one experiment config end to end")
    p.add_argument("--config", required=True, help="JSON recipe file")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--overwrite", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the sample seed")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("report", help="re-render curve.csv from a report.json")
    p.add_argument("--in", dest="report", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("selftest", help="generate synthetic data and verify the build")
    p.add_argument("--workdir", default=None, help="where to put corpus and outputs")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(fn=_cmd_selftest)
    return parser


def _cmd_fbank(args) -> int:
    waveform, rate = read_wav(args.wav)
    cfg = FbankConfig(
        sample_rate_hz=rate, n_mels=args.n_mels, win_ms=args.win_ms, hop_ms=args.hop_ms
    )
    features = log_mel_spectrogram(waveform, cfg)
    write_matrix(features, args.out)
    print(f"wrote {features.n} x {features.d} features to {args.out}")
    return 0


def _cmd_pool(args) -> int:
    ls = discover_layers(args.layers_root)
    if not 0 <= args.layer < ls.n_layers:
        raise _UsageError(f"--layer {args.layer} out of range 0..{ls.n_layers - 1}")
    records = [r for r in read_alignments(args.alignments) if r.kind == args.kind]
    matrices = {
        u: read_matrix(ls.path(u, args.layer))
        for u in sorted({r.utterance_id for r in records})
    }
    pooled = build_pooled_set(matrices, records, args.kind, args.strategy)
    write_pooled_set(pooled, args.out)
    print(f"wrote {pooled.m} pooled {args.kind} vectors to {args.out}.npy")
    return 0


def _cmd_run(args) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        raise _UsageError(f"config file not found: {config_path}")
    cfg = load_config(config_path)
    if args.seed is not None:
        cfg.sample_plan = dataclasses.replace(cfg.sample_plan, seed=args.seed)
    out_dir = Path(args.out) if args.out else cfg.output_dir
    if out_dir is None:
        raise _UsageError("no output directory: set output_dir in the config or pass --out")
    report = run_experiment(cfg, threads=args.threads)
    paths = emit_report(report, out_dir, cfg.echo(), overwrite=args.overwrite)
    print(f"wrote {paths['curve']} and {paths['report']}")
    return 0


def _cmd_report(args) -> int:
    report = load_report(args.report)
    paths = emit_report(report, args.out, None, overwrite=args.overwrite)
    print(f"wrote {paths['curve']} and {paths['report']}")
    return 0


def _cmd_selftest(args) -> int:
    workdir = args.workdir or tempfile.mkdtemp(prefix="layerprobe_selftest_")
    ok, lines, _ = selftest(workdir, threads=args.threads)
    for line in lines:
        print(line)
    print(f"selftest {'passed' if ok else 'FAILED'} (outputs in {workdir})")
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = _build_parser()
    level = os.environ.get("LAYERPROBE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
